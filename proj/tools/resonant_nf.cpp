#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "rnf/session.hpp"

namespace {

int env_workers() {
  const char* v = std::getenv("RESONANT_NF_WORKERS");
  if (!v || !*v) return 0;
  char* end = nullptr;
  long w = std::strtol(v, &end, 10);
  if (*end != '\0' || w < 1 || w > 1024) {
    std::cerr << "resonant-nf: ignoring RESONANT_NF_WORKERS='" << v << "'\n";
    return 0;
  }
  return static_cast<int>(w);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resonance graphs, block normal forms, Melnikov scans, stratification and truncated KAM steps "
               "for the resonant NLS on the torus"};
  app.require_subcommand(1, 1);
  std::string config, out = "out";
  int workers = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> tols;

  std::vector<CLI::App*> subs;
  for (const char* name : {"graph", "normal-form", "melnikov", "stratify", "kam", "all"}) {
    auto* s = app.add_subcommand(name, std::string("run the ") + name + " stage" +
                                           (std::string(name) == "all" ? "s in sequence" : ""));
    s->add_option("--config", config, "session config (JSON)")->required();
    s->add_option("--out", out, "output directory")->capture_default_str();
    s->add_option("--workers", workers, "worker threads (default: RESONANT_NF_WORKERS, else 1)")
        ->check(CLI::Range(1, 1024));
    s->add_option("--seed", seed, "overrides the config seed");
    s->add_option("--tol", tols, "tolerance override NAME=VALUE (repeatable)");
    subs.push_back(s);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  std::string which;
  for (auto* s : subs)
    if (s->parsed()) which = s->get_name();
  auto cmd = rnf::parse_subcommand(which);

  rnf::SessionConfig cfg;
  try {
    cfg = rnf::load_config(config);
    for (auto* s : subs)
      if (s->parsed() && s->count("--seed")) cfg.seed = seed;
    for (const auto& t : tols) rnf::apply_tolerance(cfg, t);
  } catch (const std::exception& e) {
    std::cerr << "resonant-nf: " << e.what() << "\n";
    return 1;
  }
  if (workers == 0) workers = env_workers();
  if (workers == 0) workers = 1;

  try {
    auto res = rnf::run_session(cfg, *cmd, workers);
    rnf::write_outputs(res, out);
    std::cout << res.summary;
    return res.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "resonant-nf: " << e.what() << "\n";
    return 1;
  }
}
