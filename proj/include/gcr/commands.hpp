#pragma once

#include <exception>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gcr/config.hpp"
#include "gcr/evaluation.hpp"
#include "gcr/trainset.hpp"

namespace gcr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPipelineFailure = 1;
inline constexpr int kExitUsage = 2;

// default < file < GCR_* environment < explicitly given flags.
RunConfig resolve_config(const std::string& config_file, const std::function<const char*(const char*)>& getenv_fn,
                         const Settings& flags);

// Each command writes its machine-readable output to cfg.out (stdout when
// empty or "-") unless noted, and returns the same data.

// Stats JSON always goes to `out`; the trie is saved to cfg.trie when set.
nlohmann::ordered_json cmd_build_trie(const RunConfig& cfg, const std::vector<std::string>& entities,
                                      std::ostream& out);
nlohmann::ordered_json cmd_decode(const RunConfig& cfg, const std::string& question,
                                  const std::vector<std::string>& entities, std::ostream& out);
nlohmann::ordered_json cmd_answer(const RunConfig& cfg, const std::string& question,
                                  const std::vector<std::string>& entities, std::ostream& out);
// Report JSON to cfg.out when set; the summary table to `out`.
EvalReport cmd_eval(const RunConfig& cfg, bool include_timings, std::ostream& out);
TrainStats cmd_gen_train(const RunConfig& cfg, std::ostream& out);

int exit_code_for(const std::exception& e) noexcept;

}  // namespace gcr
