#include "hytile/io.hpp"

#include "hytile/error.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace hytile {

namespace {

template <class Fn>
auto parsing(const char* what, Fn&& fn) {
    try {
        return fn();
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::Parse, std::string(what) + ": " + e.what());
    }
}

Json sets_json(const std::vector<VertexSet>& sets) {
    Json out = Json::array();
    for (const auto& s : sets)
        out.push_back(s);
    return out;
}

Json optional_number(const std::optional<double>& v) {
    return v ? Json(*v) : Json(nullptr);
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const char* what) {
    if (!j.is_object())
        throw Error(ErrorCode::Parse, std::string(what) + ": expected an object");
    std::set<std::string> names(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items())
        if (!names.count(key))
            throw Error(ErrorCode::Parse, std::string(what) + ": unknown key '" + key + "'");
}

} // namespace

Json to_json(const KPartiteHypergraph& h) {
    auto edges = h.edges();
    std::sort(edges.begin(), edges.end());
    Json j;
    j["k"] = h.k();
    j["part_sizes"] = std::vector<std::size_t>(h.part_sizes().begin(), h.part_sizes().end());
    j["edges"] = sets_json(edges);
    return j;
}

Json to_json(const PatternGraph& f) {
    return to_json(f.graph());
}

KPartiteHypergraph hypergraph_from_json(const Json& j) {
    return parsing("hypergraph", [&] {
        check_keys(j, {"k", "part_sizes", "edges"}, "hypergraph");
        return build_hypergraph(j.at("k").get<int>(), j.at("part_sizes").get<std::vector<std::size_t>>(),
                                j.at("edges").get<std::vector<VertexSet>>());
    });
}

PatternGraph pattern_from_json(const Json& j) {
    return PatternGraph(hypergraph_from_json(j));
}

Json to_json(const ConstructionMeta& meta) {
    Json j;
    j["construction"] = meta.which == ConstructionKind::A ? "A" : "B";
    j["k"] = meta.k;
    j["n"] = meta.n;
    j["m"] = meta.m;
    j["seed"] = meta.seed;
    if (meta.which == ConstructionKind::A) {
        j["split_first"] = meta.split_first;
        j["split_second"] = meta.split_second;
    } else {
        j["special_vertex"] = meta.special_vertex;
        j["ell"] = meta.ell;
        j["q"] = meta.q;
    }
    j["colored_sets"] = meta.colored_sets;
    j["red_bits"] = meta.red_bits;
    return j;
}

ConstructionMeta meta_from_json(const Json& j) {
    return parsing("meta", [&] {
        ConstructionMeta m;
        const auto which = j.at("construction").get<std::string>();
        if (which != "A" && which != "B")
            throw Error(ErrorCode::Parse, "meta: construction must be A or B");
        m.which = which == "A" ? ConstructionKind::A : ConstructionKind::B;
        m.k = j.at("k").get<int>();
        m.n = j.at("n").get<std::size_t>();
        m.m = j.at("m").get<std::size_t>();
        m.seed = j.at("seed").get<std::uint64_t>();
        if (m.which == ConstructionKind::A) {
            m.split_first = j.at("split_first").get<VertexSet>();
            m.split_second = j.at("split_second").get<VertexSet>();
        } else {
            m.special_vertex = j.at("special_vertex").get<Vertex>();
            m.ell = j.at("ell").get<int>();
            m.q = j.at("q").get<double>();
        }
        m.colored_sets = j.at("colored_sets").get<std::uint64_t>();
        m.red_bits = j.at("red_bits").get<std::vector<std::uint64_t>>();
        if (m.red_bits.size() != (m.colored_sets + 63) / 64)
            throw Error(ErrorCode::Parse, "meta: red_bits length does not match colored_sets");
        return m;
    });
}

Json to_json(const Embedding& e) {
    return e.image;
}

Json to_json(const Tiling& t) {
    Json out = Json::array();
    for (const auto& e : t.embeddings)
        out.push_back(to_json(e));
    return out;
}

Json to_json(const FactorResult& r) {
    Json j;
    j["verdict"] = to_string(r.verdict);
    j["nodes"] = r.nodes;
    j["copies"] = r.copies;
    if (!r.note.empty())
        j["note"] = r.note;
    j["embeddings"] = r.tiling ? to_json(*r.tiling) : Json(nullptr);
    return j;
}

Json to_json(const TilingReport& r) {
    Json j;
    j["stopped_reason"] = to_string(r.stopped_reason);
    j["copies"] = r.tiling.embeddings.size();
    j["leftover_per_part"] = r.leftover_per_part;
    j["leftover_vertices"] = r.leftover_vertices;
    j["embeddings"] = to_json(r.tiling);
    return j;
}

Json to_json(const DensenessCertificate& c) {
    Json j;
    j["p"] = c.p;
    j["mu"] = c.mu;
    j["vertex_count"] = c.vertex_count;
    j["normalization"] = c.normalization;
    j["per_part_normalization"] = optional_number(c.per_part_normalization);
    j["verdict"] = to_string(c.verdict);
    j["witness"] = c.witness ? sets_json(*c.witness) : Json(nullptr);
    j["min_slack"] = optional_number(c.min_slack);
    j["best_slack"] = optional_number(c.best_slack);
    j["trials"] = c.trials;
    j["descent_steps"] = c.descent_steps;
    return j;
}

Json to_json(const InvariantReport& r) {
    Json j;
    j["pass"] = r.pass;
    j["checked"] = r.checked;
    j["counterexample"] = r.counterexample ? Json(*r.counterexample) : Json(nullptr);
    j["detail"] = r.detail;
    return j;
}

Json to_json(const AbsorptionParams& p) {
    Json j;
    j["beta"] = p.beta;
    j["i"] = p.i;
    j["delta"] = p.delta;
    j["eta"] = p.eta;
    j["lambda"] = p.lambda;
    j["gamma"] = p.gamma;
    j["gamma_prime"] = p.gamma_prime;
    j["a"] = p.a ? Json(*p.a) : Json(nullptr);
    j["i0_prime"] = p.i0_prime;
    j["beta0_prime"] = p.beta0_prime;
    j["zeta"] = p.zeta;
    j["alpha"] = p.alpha;
    j["epsilon"] = p.epsilon;
    j["family_multiplier"] = p.family_multiplier;
    j["absorb_trials"] = p.absorb_trials;
    j["reach_trials"] = p.reach_trials;
    j["node_budget"] = p.node_budget;
    return j;
}

AbsorptionParams params_from_json(const Json& j) {
    return parsing("params", [&] {
        check_keys(j,
                   {"beta", "i", "delta", "eta", "lambda", "gamma", "gamma_prime", "a", "i0_prime",
                    "beta0_prime", "zeta", "alpha", "epsilon", "family_multiplier", "absorb_trials",
                    "reach_trials", "node_budget"},
                   "params");
        AbsorptionParams p;
        auto read = [&](const char* key, auto& field) {
            if (j.contains(key))
                field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
        };
        read("beta", p.beta);
        read("i", p.i);
        read("delta", p.delta);
        read("eta", p.eta);
        read("lambda", p.lambda);
        read("gamma", p.gamma);
        read("gamma_prime", p.gamma_prime);
        if (j.contains("a") && !j.at("a").is_null())
            p.a = j.at("a").get<std::size_t>();
        read("i0_prime", p.i0_prime);
        read("beta0_prime", p.beta0_prime);
        read("zeta", p.zeta);
        read("alpha", p.alpha);
        read("epsilon", p.epsilon);
        read("family_multiplier", p.family_multiplier);
        read("absorb_trials", p.absorb_trials);
        read("reach_trials", p.reach_trials);
        read("node_budget", p.node_budget);
        return p;
    });
}

Json to_json(const AbsorbingFamily& fam) {
    Json j;
    j["status"] = to_string(fam.status);
    j["a"] = fam.a;
    j["probability"] = fam.probability;
    j["candidates"] = fam.candidates;
    j["selected"] = fam.selected;
    j["dropped_intersecting"] = fam.dropped_intersecting;
    j["dropped_not_absorbing"] = fam.dropped_not_absorbing;
    Json members = Json::array();
    for (const auto& m : fam.members) {
        Json mj;
        mj["vertices"] = m.vertices;
        mj["absorbed_samples"] = m.absorbed_samples;
        members.push_back(std::move(mj));
    }
    j["members"] = std::move(members);
    Json cover = Json::array();
    for (const auto& e : fam.cover)
        cover.push_back(to_json(e));
    j["cover"] = std::move(cover);
    j["uncovered_exceptional"] = fam.uncovered_exceptional;
    j["w"] = fam.w;
    j["selection_seed"] = fam.selection_seed;
    j["absorb_seed"] = fam.absorb_seed;
    return j;
}

Json to_json(const PipelineResult& r) {
    Json j;
    j["verdict"] = to_string(r.verdict);
    j["used_fallback"] = r.used_fallback;
    j["failed_stage"] = r.failed_stage.empty() ? Json(nullptr) : Json(r.failed_stage);
    Json stages = Json::array();
    for (const auto& s : r.stages) {
        Json sj;
        sj["stage"] = s.stage;
        sj["status"] = s.status;
        sj["detail"] = s.detail;
        sj["seed"] = s.seed ? Json(*s.seed) : Json(nullptr);
        stages.push_back(std::move(sj));
    }
    j["stages"] = std::move(stages);
    j["embeddings"] = r.tiling ? to_json(*r.tiling) : Json(nullptr);
    return j;
}

Json to_json(const RegPartition& p) {
    Json j;
    j["k"] = p.k;
    j["epsilon"] = p.epsilon;
    j["t"] = p.t;
    j["m0"] = p.m0;
    j["energy"] = p.energy;
    j["energy_history"] = p.energy_history;
    j["energy_monotone"] = p.energy_monotone;
    j["rounds"] = p.rounds;
    j["refuted_fraction"] = p.refuted_fraction;
    j["refuted_tuples"] = p.refuted_tuples;
    j["stop_reason"] = p.stop_reason;
    j["round_cap_hit"] = p.round_cap_hit;
    j["exceptional_within_bound"] = p.exceptional_within_bound;
    j["exceptional"] = p.exceptional;
    Json clusters = Json::array();
    for (const auto& part : p.clusters)
        clusters.push_back(sets_json(part));
    j["clusters"] = std::move(clusters);
    return j;
}

RegPartition partition_from_json(const Json& j) {
    return parsing("partition", [&] {
        RegPartition p;
        p.k = j.at("k").get<int>();
        p.epsilon = j.at("epsilon").get<double>();
        p.t = j.at("t").get<std::size_t>();
        p.m0 = j.at("m0").get<std::size_t>();
        p.exceptional = j.at("exceptional").get<VertexSet>();
        p.clusters = j.at("clusters").get<std::vector<std::vector<VertexSet>>>();
        if (j.contains("energy"))
            p.energy = j.at("energy").get<double>();
        return p;
    });
}

Json provenance_json(const ClusterHypergraph& r) {
    Json j;
    j["d"] = r.d;
    j["epsilon"] = r.epsilon;
    Json tuples = Json::array();
    for (const auto& rec : r.provenance) {
        Json tj;
        tj["clusters"] = rec.clusters;
        tj["density"] = {rec.density.num, rec.density.den};
        tj["verdict"] = to_string(rec.verdict);
        tj["edge"] = rec.edge;
        tuples.push_back(std::move(tj));
    }
    j["tuples"] = std::move(tuples);
    return j;
}

Json to_json(const CodegreeReport& r) {
    Json j;
    j["t"] = r.t;
    j["threshold"] = r.threshold;
    j["sets"] = r.sets;
    j["violations"] = r.violations;
    j["violations_by_missing_part"] = r.violations_by_missing_part;
    Json hist = Json::array();
    for (const auto& [deg, count] : r.histogram)
        hist.push_back({deg, count});
    j["histogram"] = std::move(hist);
    j["pass"] = r.pass;
    return j;
}

Json to_json(const ClusterMatching& m) {
    Json j;
    j["edges"] = sets_json(m.edges);
    j["leftover_per_part"] = m.leftover_per_part;
    j["optimal"] = m.optimal;
    j["nodes"] = m.nodes;
    j["bound_met"] = m.bound_met ? Json(*m.bound_met) : Json(nullptr);
    j["delta_prime"] = m.delta_prime;
    j["low_degree_sets"] = m.low_degree_sets;
    return j;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Parse, "cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::Parse, path + ": " + e.what());
    }
}

std::string dump(const Json& j) {
    return j.dump(2) + "\n";
}

void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::Parse, "cannot write '" + path + "'");
    out << dump(j);
    if (!out)
        throw Error(ErrorCode::Parse, "failed writing '" + path + "'");
}

} // namespace hytile
