#include <CLI11.hpp>

#include <iostream>

#include "winr/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = winr::cli;
  CLI::App app{"Wavelet-template implicit neural representations"};
  app.require_subcommand(1);
  cli::Options opt;
  std::string config, out, suite;
  std::uint64_t seed = 0;

  const std::vector<std::pair<std::string, std::string>> descriptions{
      {"verify", "run the expansion, locality, progressivity and gradient suites"},
      {"fit1d", "fit the split model to a generated 1D signal"},
      {"fit2d", "fit the split model to an image with random and Canny initialization"},
      {"init-bench", "random vs. WMM initialization benchmark"},
      {"fig3", "two-cone Meyer construction and its spectrum"},
      {"spectrum", "spectrum of a saved model or a generated signal"},
      {"gen", "write a generated signal (CSV) or image (PGM)"}};
  for (const auto& [name, text] : descriptions) {
    auto* sub = app.add_subcommand(name, text);
    sub->add_option("--config", config, "winr-config-v1 JSON file");
    sub->add_option("--seed", seed, "seed (overrides the config)");
    sub->add_option("--out", out, "output directory (default $WINR_OUT/<command>)");
    sub->add_option("--jobs", opt.jobs, "threads for independent trials")->check(CLI::PositiveNumber);
    if (name == "verify") sub->add_option("--suite", suite, "run a single suite");
    sub->callback([&, sub, name = name] {
      opt.command = name;
      if (sub->count("--config")) opt.config_path = config;
      if (sub->count("--seed")) opt.seed = seed;
      if (sub->count("--out")) opt.out = out;
      if (name == "verify" && sub->count("--suite")) opt.suite = suite;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kUsage;
  }
  return cli::run(opt, std::cout, std::cerr);
}
