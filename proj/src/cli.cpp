#include "hytile/cli.hpp"

#include "hytile/error.hpp"
#include "hytile/io.hpp"
#include "hytile/parallel.hpp"
#include "hytile/rng.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

namespace hytile {

namespace {

constexpr const char* version = "0.1.0";

std::string hex(std::uint64_t x) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

std::string number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

struct SeedOption {
    std::uint64_t value = 0;
    CLI::Option* option = nullptr;

    void add(CLI::App* app) { option = app->add_option("--seed", value, "Random seed"); }

    std::uint64_t resolve(std::ostream& err) {
        if (option->count() == 0) {
            std::random_device rd;
            value = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
            err << "seed: " << value << "\n";
        }
        return value;
    }
};

struct PatternOption {
    std::string path;
    std::size_t m = 0;

    void add(CLI::App* app) {
        auto* p = app->add_option("--pattern", path, "Pattern file");
        auto* mm = app->add_option("--m", m, "Use K_k(m) as the pattern");
        p->excludes(mm);
    }

    PatternGraph load(int k) const {
        if (!path.empty())
            return pattern_from_json(read_json_file(path));
        if (m == 0)
            throw Error(ErrorCode::BadParams, "give --pattern or --m");
        return pattern_complete(k, m);
    }

    Json describe(const PatternGraph& f) const {
        if (!path.empty())
            return to_json(f);
        return Json{{"complete", true}, {"m", m}};
    }
};

Json header(const std::string& command) {
    Json j;
    j["tool"] = "hytile";
    j["version"] = version;
    j["command"] = command;
    return j;
}

Json host_summary(const KPartiteHypergraph& h) {
    Json j;
    j["k"] = h.k();
    j["part_sizes"] = std::vector<std::size_t>(h.part_sizes().begin(), h.part_sizes().end());
    j["edge_count"] = h.edge_count();
    j["fingerprint"] = hex(h.fingerprint());
    Json degrees = Json::array();
    for (int s = 1; s < h.k(); ++s)
        degrees.push_back(partite_min_degree(h, s));
    j["min_degree"] = std::move(degrees);
    std::size_t max_vertex = 0;
    for (Vertex v = 0; v < h.vertex_count(); ++v)
        max_vertex = std::max(max_vertex, h.vertex_degree(v));
    j["max_vertex_degree"] = max_vertex;
    return j;
}

void emit(const Json& report, const std::string& path, std::ostream& out) {
    if (path.empty())
        out << dump(report);
    else
        write_json_file(path, report);
}

int factor_exit(FactorVerdict v) {
    switch (v) {
    case FactorVerdict::Found:
        return exit_code::ok;
    case FactorVerdict::None:
        return exit_code::negative;
    case FactorVerdict::Unknown:
        return exit_code::unknown;
    }
    return exit_code::unknown;
}

struct Range {
    std::vector<double> values;
};

Range parse_range(const std::string& text) {
    Range r;
    std::vector<double> fields;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ':')) {
        try {
            std::size_t used = 0;
            fields.push_back(std::stod(part, &used));
            if (used != part.size())
                throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw Error(ErrorCode::BadParams, "bad range '" + text + "'");
        }
    }
    if (fields.size() == 1) {
        r.values = fields;
        return r;
    }
    if (fields.size() != 3 || !(fields[2] > 0) || fields[1] < fields[0])
        throw Error(ErrorCode::BadParams, "range must be a:b:step with a <= b and step > 0");
    const auto count = static_cast<std::size_t>(std::llround((fields[1] - fields[0]) / fields[2])) + 1;
    for (std::size_t i = 0; i < count; ++i)
        r.values.push_back(std::round((fields[0] + static_cast<double>(i) * fields[2]) * 1e9) / 1e9);
    return r;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

template <class T>
std::string joined(const std::vector<T>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i)
            out += ';';
        out += std::to_string(xs[i]);
    }
    return out;
}


struct GenArgs {
    std::string kind;
    int k = 3;
    std::size_t n = 0;
    std::size_t m = 2;
    double p = 0.5;
    double q = 0.7;
    int ell = 1;
    SeedOption seed;
    std::string out;
    std::string meta;
    std::string report;
    unsigned workers = 1;
};

Construction generate(const std::string& kind, int k, std::size_t n, std::size_t m, double p, double q,
                      int ell, std::uint64_t seed, unsigned workers, bool& has_meta) {
    GeneratorOptions options;
    options.workers = workers;
    has_meta = false;
    if (kind == "iid")
        return {gen_iid(k, n, p, seed, options), {}};
    if (kind == "complete")
        return {gen_complete(k, n), {}};
    has_meta = true;
    if (kind == "consA")
        return gen_construction_a(k, n, m, seed, options);
    return gen_construction_b(k, n, m, ell, q, seed, options);
}

Json kind_params(const std::string& kind, int k, std::size_t n, std::size_t m, double p, double q, int ell) {
    Json j;
    j["kind"] = kind;
    j["k"] = k;
    j["n"] = n;
    if (kind == "iid")
        j["p"] = p;
    if (kind == "consA" || kind == "consB")
        j["m"] = m;
    if (kind == "consB") {
        j["q"] = q;
        j["ell"] = ell;
    }
    return j;
}

int cmd_gen(GenArgs& a, std::ostream& out, std::ostream& err) {
    const std::uint64_t seed = a.kind == "complete" ? 0 : a.seed.resolve(err);
    bool has_meta = false;
    auto c = generate(a.kind, a.k, a.n, a.m, a.p, a.q, a.ell, seed, a.workers, has_meta);
    write_json_file(a.out, to_json(c.host));
    Json report = header("gen");
    report["params"] = kind_params(a.kind, a.k, a.n, a.m, a.p, a.q, a.ell);
    report["seed"] = seed;
    report["host"] = host_summary(c.host);
    report["host_file"] = a.out;
    if (has_meta) {
        const std::string meta = a.meta.empty() ? a.out + ".meta.json" : a.meta;
        write_json_file(meta, to_json(c.meta));
        report["meta_file"] = meta;
    }
    emit(report, a.report, out);
    return exit_code::ok;
}


struct AnalyzeArgs {
    std::string host;
    std::string meta;
    std::optional<double> p;
    double mu = 0.05;
    std::string mode = "sampled";
    std::uint64_t trials = 1000;
    std::uint64_t cap = std::uint64_t{1} << 24;
    SeedOption seed;
    std::string report;
    unsigned workers = 1;
};

int cmd_analyze(AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
    auto h = hypergraph_from_json(read_json_file(a.host));
    Json report = header("analyze");
    Json params;
    params["host"] = a.host;
    int code = exit_code::ok;
    report["host"] = host_summary(h);
    if (a.p) {
        params["p"] = *a.p;
        params["mu"] = a.mu;
        params["mode"] = a.mode;
        DensenessMode mode = DensenessMode::exact(a.cap);
        if (a.mode == "sampled") {
            params["trials"] = a.trials;
            const std::uint64_t seed = a.seed.resolve(err);
            report["seed"] = seed;
            mode = DensenessMode::sampled(a.trials, seed, a.workers);
        }
        auto cert = denseness_verdict(h, *a.p, a.mu, mode);
        if (cert.verdict == DensenessVerdict::Refuted)
            code = exit_code::negative;
        report["denseness"] = to_json(cert);
    }
    if (!a.meta.empty()) {
        params["meta"] = a.meta;
        auto inv = verify_construction_invariant(h, meta_from_json(read_json_file(a.meta)));
        if (!inv.pass)
            code = exit_code::negative;
        report["invariant"] = to_json(inv);
    }
    report["params"] = std::move(params);
    emit(report, a.report, out);
    return code;
}


struct FactorArgs {
    std::string host;
    PatternOption pattern;
    std::uint64_t budget = 10'000'000;
    bool fail_first = false;
    std::optional<double> greedy;
    std::string witness;
    std::string report;
};

int cmd_factor(FactorArgs& a, std::ostream& out, std::ostream&) {
    auto h = hypergraph_from_json(read_json_file(a.host));
    auto f = a.pattern.load(h.k());
    Json report = header("factor");
    Json params;
    params["host"] = a.host;
    params["pattern"] = a.pattern.describe(f);
    params["budget"] = a.budget;
    report["host"] = host_summary(h);
    if (a.greedy) {
        params["greedy_omega"] = *a.greedy;
        report["params"] = std::move(params);
        auto g = greedy_tiling(h, f, *a.greedy, a.budget);
        report["greedy"] = to_json(g);
        emit(report, a.report, out);
        return g.stopped_reason == StopReason::BudgetExhausted ? exit_code::unknown : exit_code::ok;
    }
    params["fail_first"] = a.fail_first;
    report["params"] = std::move(params);
    FactorOptions options;
    options.node_budget = a.budget;
    options.fail_first = a.fail_first;
    auto r = exact_factor(h, f, options);
    report["factor"] = to_json(r);
    if (r.tiling && !a.witness.empty()) {
        Json w;
        w["pattern"] = to_json(f);
        w["embeddings"] = to_json(*r.tiling);
        write_json_file(a.witness, w);
        report["witness_file"] = a.witness;
    }
    emit(report, a.report, out);
    return factor_exit(r.verdict);
}


struct AbsorbArgs {
    std::string host;
    PatternOption pattern;
    std::string params;
    SeedOption seed;
    std::string witness;
    std::string report;
};

int cmd_absorb(AbsorbArgs& a, std::ostream& out, std::ostream& err) {
    auto h = hypergraph_from_json(read_json_file(a.host));
    auto f = a.pattern.load(h.k());
    AbsorptionParams params = a.params.empty() ? AbsorptionParams{} : params_from_json(read_json_file(a.params));
    const std::uint64_t seed = a.seed.resolve(err);
    auto r = perfect_tiling_pipeline(h, f, params, seed);
    Json report = header("absorb");
    Json pj;
    pj["host"] = a.host;
    pj["pattern"] = a.pattern.describe(f);
    pj["absorption"] = to_json(params);
    report["params"] = std::move(pj);
    report["seed"] = seed;
    report["host"] = host_summary(h);
    report["pipeline"] = to_json(r);
    if (r.tiling && !a.witness.empty()) {
        Json w;
        w["pattern"] = to_json(f);
        w["embeddings"] = to_json(*r.tiling);
        write_json_file(a.witness, w);
        report["witness_file"] = a.witness;
    }
    emit(report, a.report, out);
    return factor_exit(r.verdict);
}


struct RegpartArgs {
    std::string host;
    double eps = 0.25;
    std::size_t t0 = 3;
    SeedOption seed;
    std::string out;
    WeakRegOptions options;
    std::string report;
};

int cmd_regpart(RegpartArgs& a, std::ostream& out, std::ostream& err) {
    auto h = hypergraph_from_json(read_json_file(a.host));
    const std::uint64_t seed = a.seed.resolve(err);
    auto p = weak_regular_partition(h, a.eps, a.t0, seed, a.options);
    write_json_file(a.out, to_json(p));
    Json report = header("regpart");
    Json params;
    params["host"] = a.host;
    params["eps"] = a.eps;
    params["t0"] = a.t0;
    params["trials"] = a.options.trials;
    params["round_cap"] = a.options.round_cap;
    report["params"] = std::move(params);
    report["seed"] = seed;
    report["host"] = host_summary(h);
    Json pj = to_json(p);
    pj.erase("clusters");
    pj.erase("exceptional");
    pj["exceptional_size"] = p.exceptional.size();
    std::string why;
    pj["valid"] = validate_partition(h, p, &why);
    report["partition"] = std::move(pj);
    report["partition_file"] = a.out;
    emit(report, a.report, out);
    return p.round_cap_hit ? exit_code::unknown : exit_code::ok;
}


struct ClusterArgs {
    std::string host;
    std::string partition;
    double d = 0.25;
    std::optional<double> eps;
    std::string mode = "sampled";
    std::uint64_t trials = 64;
    SeedOption seed;
    double xi = 0.1;
    std::optional<std::size_t> t0;
    std::uint64_t budget = 10'000'000;
    std::string out;
    std::string provenance;
    std::string report;
    unsigned workers = 1;
};

int cmd_cluster(ClusterArgs& a, std::ostream& out, std::ostream& err) {
    auto h = hypergraph_from_json(read_json_file(a.host));
    auto p = partition_from_json(read_json_file(a.partition));
    std::string why;
    if (!validate_partition(h, p, &why))
        throw Error(ErrorCode::BadParams, "partition does not fit the host: " + why);
    const double eps = a.eps.value_or(p.epsilon);
    Json report = header("cluster");
    Json params;
    params["host"] = a.host;
    params["partition"] = a.partition;
    params["d"] = a.d;
    params["eps"] = eps;
    params["mode"] = a.mode;
    params["xi"] = a.xi;
    RegularityMode mode = RegularityMode::exact();
    if (a.mode == "sampled") {
        params["trials"] = a.trials;
        const std::uint64_t seed = a.seed.resolve(err);
        report["seed"] = seed;
        mode = RegularityMode::sampled(a.trials, seed);
    }
    if (a.t0)
        params["t0"] = *a.t0;
    report["params"] = std::move(params);
    auto r = cluster_hypergraph(h, p, eps, a.d, mode, a.workers);
    write_json_file(a.out, to_json(r.graph));
    const std::string prov = a.provenance.empty() ? a.out + ".provenance.json" : a.provenance;
    write_json_file(prov, provenance_json(r));
    report["cluster_hypergraph"] = host_summary(r.graph);
    report["cluster_file"] = a.out;
    report["provenance_file"] = prov;
    report["codegree"] = to_json(codegree_inheritance(r.graph, eps, a.xi));
    report["matching"] = to_json(cluster_matching(r.graph, a.t0, a.budget));
    emit(report, a.report, out);
    return exit_code::ok;
}


struct SweepArgs {
    std::string kind;
    std::string p_range;
    std::string q_range;
    std::vector<std::size_t> n;
    int k = 3;
    std::size_t m = 2;
    int ell = 1;
    std::size_t seeds = 1;
    SeedOption seed;
    std::string analysis = "greedy-leftover";
    double omega = 0;
    double mu = 0.05;
    std::uint64_t trials = 200;
    std::uint64_t budget = 10'000'000;
    std::string out;
    unsigned workers = 1;
};

struct SweepCell {
    double p = 0;
    double q = 0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
};

std::vector<std::string> sweep_row(const SweepArgs& a, const SweepCell& c) {
    const auto start = std::chrono::steady_clock::now();
    bool has_meta = false;
    auto gen = generate(a.kind, a.k, c.n, a.m, c.p, c.q, a.ell, c.seed, 1, has_meta);
    const auto& h = gen.host;
    const auto f = pattern_complete(a.k, a.m);
    std::string verdict, leftover, min_slack;
    if (a.analysis == "greedy-leftover") {
        auto g = greedy_tiling(h, f, a.omega, a.budget);
        verdict = to_string(g.stopped_reason);
        leftover = joined(g.leftover_per_part);
    } else if (a.analysis == "exact-factor") {
        FactorOptions options;
        options.node_budget = a.budget;
        auto r = exact_factor(h, f, options);
        verdict = to_string(r.verdict);
    } else if (a.analysis == "denseness") {
        const double p = a.kind == "iid" ? c.p : a.kind == "consB" ? construction_b_density(a.k, a.ell, c.q) : 0.5;
        auto cert = denseness_verdict(h, p, a.mu, DensenessMode::sampled(a.trials, c.seed));
        verdict = to_string(cert.verdict);
        if (cert.best_slack)
            min_slack = number(*cert.best_slack);
    } else if (a.analysis == "pipeline") {
        AbsorptionParams params;
        params.node_budget = a.budget;
        auto r = perfect_tiling_pipeline(h, f, params, c.seed);
        verdict = to_string(r.verdict);
    } else {
        verdict = "ok";
    }
    std::vector<std::uint64_t> degrees;
    for (int s = 1; s < a.k; ++s)
        degrees.push_back(partite_min_degree(h, s));
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    char runtime[32];
    std::snprintf(runtime, sizeof runtime, "%.3f", ms);
    return {a.kind,
            std::to_string(a.k),
            std::to_string(c.n),
            a.kind == "consA" || a.kind == "consB" ? std::to_string(a.m) : "",
            a.kind == "iid" ? number(c.p) : "",
            a.kind == "consB" ? number(c.q) : "",
            std::to_string(c.seed),
            a.analysis,
            verdict,
            leftover,
            joined(degrees),
            min_slack,
            runtime};
}

int cmd_sweep(SweepArgs& a, std::ostream& out, std::ostream& err) {
    if (a.kind == "iid" && a.p_range.empty())
        throw Error(ErrorCode::BadParams, "sweep --kind iid needs --p");
    if (a.kind == "consB" && a.q_range.empty())
        throw Error(ErrorCode::BadParams, "sweep --kind consB needs --q");
    if (a.seeds == 0)
        throw Error(ErrorCode::BadParams, "--seeds must be positive");
    const std::uint64_t base = a.kind == "complete" ? 0 : a.seed.resolve(err);
    std::vector<double> ps{0}, qs{0};
    if (a.kind == "iid")
        ps = parse_range(a.p_range).values;
    if (a.kind == "consB")
        qs = parse_range(a.q_range).values;
    std::vector<SweepCell> cells;
    for (double p : ps)
        for (double q : qs)
            for (std::size_t n : a.n)
                for (std::size_t s = 0; s < a.seeds; ++s)
                    cells.push_back({p, q, n, a.kind == "complete" ? 0 : derive_seed(base, stream::sweep, s)});
    std::vector<std::vector<std::string>> rows(cells.size());
    parallel_for(cells.size(), a.workers, [&](std::size_t i) { rows[i] = sweep_row(a, cells[i]); });

    std::ofstream file;
    std::ostream* sink = &out;
    if (!a.out.empty()) {
        file.open(a.out, std::ios::binary);
        if (!file)
            throw Error(ErrorCode::Parse, "cannot write '" + a.out + "'");
        sink = &file;
    }
    *sink << "kind,k,n,m,p,q,seed,analysis,verdict,leftover,delta_prime,min_slack,runtime_ms\r\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            *sink << (i ? "," : "") << csv_field(row[i]);
        *sink << "\r\n";
    }
    return exit_code::ok;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Construct, analyze and tile k-partite k-uniform hypergraphs", "hytile"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Generate a host hypergraph");
    g->add_option("--kind", gen.kind, "Host family")->required()->check(CLI::IsMember({"iid", "consA", "consB", "complete"}));
    g->add_option("--k", gen.k, "Uniformity")->check(CLI::Range(2, 8));
    g->add_option("--n", gen.n, "Vertices per part")->required()->check(CLI::PositiveNumber);
    g->add_option("--m", gen.m, "Pattern part size for the constructions")->check(CLI::PositiveNumber);
    g->add_option("--p", gen.p, "Edge probability (iid)")->check(CLI::Range(0.0, 1.0));
    g->add_option("--q", gen.q, "Red probability (consB)")->check(CLI::Range(0.0, 1.0));
    g->add_option("--ell", gen.ell, "Colored set size minus one (consB)");
    gen.seed.add(g);
    g->add_option("--out", gen.out, "Host file")->required();
    g->add_option("--meta", gen.meta, "Meta sidecar (default <out>.meta.json)");
    g->add_option("--report", gen.report, "Report file (default stdout)");
    g->add_option("--workers", gen.workers, "Worker threads")->check(CLI::PositiveNumber);

    AnalyzeArgs an;
    auto* a = app.add_subcommand("analyze", "Degrees, denseness and construction invariants");
    a->add_option("--host", an.host, "Host file")->required();
    a->add_option("--meta", an.meta, "Construction meta sidecar");
    a->add_option("--p", an.p, "Denseness density p")->check(CLI::Range(0.0, 1.0));
    a->add_option("--mu", an.mu, "Denseness slack mu");
    a->add_option("--mode", an.mode, "Denseness mode")->check(CLI::IsMember({"exact", "sampled"}));
    a->add_option("--trials", an.trials, "Sampled trials");
    a->add_option("--cap", an.cap, "Exact enumeration cap");
    an.seed.add(a);
    a->add_option("--report", an.report, "Report file (default stdout)");
    a->add_option("--workers", an.workers, "Worker threads")->check(CLI::PositiveNumber);

    FactorArgs fa;
    auto* f = app.add_subcommand("factor", "Exact F-factor search or greedy tiling");
    f->add_option("--host", fa.host, "Host file")->required();
    fa.pattern.add(f);
    f->add_option("--budget", fa.budget, "Search node budget");
    f->add_flag("--fail-first", fa.fail_first, "Branch on the vertex with fewest live copies");
    f->add_option("--greedy", fa.greedy, "Run greedy tiling with this omega instead");
    f->add_option("--witness", fa.witness, "Write the factor here when found");
    f->add_option("--report", fa.report, "Report file (default stdout)");

    AbsorbArgs ab;
    auto* b = app.add_subcommand("absorb", "Absorbing-method tiling pipeline");
    b->add_option("--host", ab.host, "Host file")->required();
    ab.pattern.add(b);
    b->add_option("--params", ab.params, "Absorption parameter file");
    ab.seed.add(b);
    b->add_option("--witness", ab.witness, "Write the factor here when found");
    b->add_option("--report", ab.report, "Report file (default stdout)");

    RegpartArgs rp;
    auto* r = app.add_subcommand("regpart", "Weak regular partition");
    r->add_option("--host", rp.host, "Host file")->required();
    r->add_option("--eps", rp.eps, "Regularity epsilon")->check(CLI::Range(0.0, 1.0));
    r->add_option("--t0", rp.t0, "Initial clusters per part")->check(CLI::PositiveNumber);
    rp.seed.add(r);
    r->add_option("--out", rp.out, "Partition file")->required();
    r->add_option("--trials", rp.options.trials, "Sampled trials per tuple");
    r->add_option("--round-cap", rp.options.round_cap, "Refinement round cap");
    r->add_option("--workers", rp.options.workers, "Worker threads")->check(CLI::PositiveNumber);
    r->add_option("--report", rp.report, "Report file (default stdout)");

    ClusterArgs cl;
    auto* c = app.add_subcommand("cluster", "Cluster hypergraph, codegree inheritance and matching");
    c->add_option("--host", cl.host, "Host file")->required();
    c->add_option("--partition", cl.partition, "Partition file")->required();
    c->add_option("--d", cl.d, "Density threshold")->check(CLI::Range(0.0, 1.0));
    c->add_option("--eps", cl.eps, "Regularity epsilon (default from the partition)");
    c->add_option("--mode", cl.mode, "Regularity mode")->check(CLI::IsMember({"exact", "sampled"}));
    c->add_option("--trials", cl.trials, "Sampled trials per tuple");
    cl.seed.add(c);
    c->add_option("--xi", cl.xi, "Allowed violation fraction");
    c->add_option("--t0", cl.t0, "Matching bound parameter");
    c->add_option("--budget", cl.budget, "Matching node budget");
    c->add_option("--out", cl.out, "Cluster hypergraph file")->required();
    c->add_option("--provenance", cl.provenance, "Provenance sidecar (default <out>.provenance.json)");
    c->add_option("--report", cl.report, "Report file (default stdout)");
    c->add_option("--workers", cl.workers, "Worker threads")->check(CLI::PositiveNumber);

    SweepArgs sw;
    auto* s = app.add_subcommand("sweep", "Parameter grid, one CSV row per cell");
    s->add_option("--kind", sw.kind, "Host family")->required()->check(CLI::IsMember({"iid", "consA", "consB", "complete"}));
    s->add_option("--p", sw.p_range, "p value or a:b:step (iid)");
    s->add_option("--q", sw.q_range, "q value or a:b:step (consB)");
    s->add_option("--n", sw.n, "Vertices per part, comma separated")->required()->delimiter(',');
    s->add_option("--k", sw.k, "Uniformity")->check(CLI::Range(2, 8));
    s->add_option("--m", sw.m, "Pattern part size")->check(CLI::PositiveNumber);
    s->add_option("--ell", sw.ell, "consB parameter");
    s->add_option("--seeds", sw.seeds, "Seeds per cell");
    sw.seed.add(s);
    s->add_option("--analysis", sw.analysis, "Per-cell analysis")
        ->check(CLI::IsMember({"greedy-leftover", "exact-factor", "degrees", "denseness", "pipeline"}));
    s->add_option("--omega", sw.omega, "Greedy omega");
    s->add_option("--mu", sw.mu, "Denseness mu");
    s->add_option("--trials", sw.trials, "Denseness trials");
    s->add_option("--budget", sw.budget, "Search node budget");
    s->add_option("--out", sw.out, "CSV file (default stdout)");
    s->add_option("--workers", sw.workers, "Worker threads")->check(CLI::PositiveNumber);

    std::vector<const char*> argv{"hytile"};
    for (const auto& x : args)
        argv.push_back(x.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << (dynamic_cast<const CLI::CallForVersion*>(&e) ? std::string(version) + "\n"
                                                                  : app.help());
            return exit_code::ok;
        }
        err << "hytile: " << e.what() << "\n";
        return exit_code::usage;
    }
    try {
        if (g->parsed())
            return cmd_gen(gen, out, err);
        if (a->parsed())
            return cmd_analyze(an, out, err);
        if (f->parsed())
            return cmd_factor(fa, out, err);
        if (b->parsed())
            return cmd_absorb(ab, out, err);
        if (r->parsed())
            return cmd_regpart(rp, out, err);
        if (c->parsed())
            return cmd_cluster(cl, out, err);
        return cmd_sweep(sw, out, err);
    } catch (const Error& e) {
        err << "hytile: " << e.what() << "\n";
        return e.code() == ErrorCode::Budget ? exit_code::unknown : exit_code::usage;
    }
}

} // namespace hytile
