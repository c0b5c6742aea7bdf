#pragma once

#include "hytile/absorption.hpp"
#include "hytile/denseness.hpp"
#include "hytile/generators.hpp"
#include "hytile/hypergraph.hpp"
#include "hytile/tiling.hpp"
#include "hytile/weakreg.hpp"

#include "json.hpp"

#include <string>

namespace hytile {

using Json = nlohmann::ordered_json;

/// {k, part_sizes, edges} with edges sorted lexicographically.
Json to_json(const KPartiteHypergraph& h);
Json to_json(const PatternGraph& f);
/// Both throw Parse on malformed documents and the usual hypercore errors on
/// illegal contents.
KPartiteHypergraph hypergraph_from_json(const Json& j);
PatternGraph pattern_from_json(const Json& j);

Json to_json(const ConstructionMeta& meta);
ConstructionMeta meta_from_json(const Json& j);

Json to_json(const Embedding& e);
Json to_json(const Tiling& t);
Json to_json(const FactorResult& r);
Json to_json(const TilingReport& r);
Json to_json(const DensenessCertificate& c);
Json to_json(const InvariantReport& r);

Json to_json(const AbsorptionParams& p);
/// Missing keys keep their defaults; unknown keys throw Parse.
AbsorptionParams params_from_json(const Json& j);
Json to_json(const AbsorbingFamily& fam);
Json to_json(const PipelineResult& r);

Json to_json(const RegPartition& p);
/// Reads the clusters, V_0 and the scalar fields; histories are not restored.
RegPartition partition_from_json(const Json& j);
Json provenance_json(const ClusterHypergraph& r);
Json to_json(const CodegreeReport& r);
Json to_json(const ClusterMatching& m);

/// Throws Parse when the file is missing or is not valid JSON.
Json read_json_file(const std::string& path);
/// Two-space indentation and a trailing newline.
void write_json_file(const std::string& path, const Json& j);
std::string dump(const Json& j);

} // namespace hytile
