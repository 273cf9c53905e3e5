#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "rnf/pipeline.hpp"

namespace rnf {

using ojson = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "resonant-nf/report/v1";

// Two-space indented JSON in insertion order; floating values with 17
// significant digits, non-finite values as null.
std::string dump_json(const ojson& j);

std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t h);

ojson module_versions();
ojson config_json(const SessionConfig& c);
ojson diagnostics_json(const Diagnostics& ds);

ojson graph_json(const GraphStage& g);
ojson normal_form_json(const NormalFormStage& nf);
ojson melnikov_json(const MelnikovStage& m);
ojson stratify_json(const StratifyStage& s);
ojson kam_json(const KamStage& k);

// One row per KAM step, all seeds, prefixed with the seed.
std::string kam_csv(const KamStage& k);

std::string graph_summary(const GraphStage& g);
std::string normal_form_summary(const NormalFormStage& nf);
std::string melnikov_summary(const MelnikovStage& m);
std::string stratify_summary(const StratifyStage& s);
std::string kam_summary(const KamStage& k);

}  // namespace rnf
