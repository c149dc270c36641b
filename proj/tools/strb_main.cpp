// strb: offline/online/study/diagnose driver.

#include "strb/error.hpp"
#include "strb/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace strb;
using namespace strb::pipeline;

namespace {

struct Overrides {
  std::string config;
  std::string output;
  std::optional<int> steps, n_train, n_test, repetitions;
  std::optional<std::uint64_t> seed;
  std::vector<double> eps;
  std::optional<double> eps_t;
  std::vector<std::string> methods;
  bool no_enrichment = false;
  std::string log_level = "info";

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config, "JSON study configuration")->check(CLI::ExistingFile);
    app->add_option("-o,--output", output, "artifact store directory");
    app->add_option("--steps", steps, "number of time steps");
    app->add_option("--n-train", n_train, "training parameter count");
    app->add_option("--n-test", n_test, "test parameter count");
    app->add_option("--seed", seed, "sampling seed");
    app->add_option("--eps", eps, "POD tolerances, one level each, shared by all fields");
    app->add_option("--eps-t", eps_t, "temporal enrichment threshold");
    app->add_option("--methods", methods, "srbtfo, stgrb, stpgrb");
    app->add_option("--repetitions", repetitions, "timing repetitions");
    app->add_flag("--no-enrichment", no_enrichment, "skip the temporal supremizer enrichment");
    app->add_option("--log-level", log_level, "trace, debug, info, warn, error, off");
  }

  [[nodiscard]] StudyConfig resolve() const {
    StudyConfig c = config.empty() ? StudyConfig{} : load_config(config);
    if (!output.empty()) c.output = output;
    if (steps) c.steps = *steps;
    if (n_train) c.n_train = *n_train;
    if (n_test) c.n_test = *n_test;
    if (seed) c.seed = *seed;
    if (repetitions) c.repetitions = *repetitions;
    if (!eps.empty()) {
      c.tolerances.clear();
      for (double e : eps) c.tolerances.push_back({e, e, e});
    }
    if (eps_t) c.eps_t = *eps_t;
    if (!methods.empty()) {
      c.methods.clear();
      for (const auto& m : methods) c.methods.push_back(parse_method(m));
    }
    if (no_enrichment) c.temporal_enrichment = false;
    validate(c);
    set_log_level(log_level);
    return c;
  }
};

void print_events(const std::vector<StageEvent>& events) {
  for (const auto& e : events)
    std::cout << (e.cached ? "cached   " : "computed ") << e.stage << ' ' << e.key << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Space-time reduced basis toolkit for parametrized Stokes flows"};
  app.require_subcommand(1);
  Overrides ov;

  auto* offline = app.add_subcommand("offline", "build FOM, snapshots, bases and reduced operators");
  ov.attach(offline);

  auto* online = app.add_subcommand("online", "solve one reduced query from stored offline artifacts");
  ov.attach(online);
  std::string method, mu_text;
  std::size_t level = 0;
  bool reference = false;
  online->add_option("-m,--method", method, "srbtfo, stgrb or stpgrb")->required();
  online->add_option("--mu", mu_text, "parameter as mu0,mu1,mu2")->required();
  online->add_option("--level", level, "tolerance level index");
  online->add_flag("--reference", reference, "also run the full-order model and report errors");

  auto* study = app.add_subcommand("study", "offline phase plus test-set errors and timings for every method");
  ov.attach(study);

  auto* diagnose = app.add_subcommand("diagnose", "rank, inf-sup and conditioning report");
  ov.attach(diagnose);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const StudyConfig c = ov.resolve();
    if (*offline) {
      const auto s = run_offline(c);
      print_events(s.events);
    } else if (*online) {
      const Method m = parse_method(method);
      const fom::Parameter mu = parse_parameter(mu_text);
      const auto s = run_offline(c, false);
      const auto r = run_online(s, m, level, mu, reference);
      std::cout << "output " << r.output.string() << '\n';
      if (!r.in_domain) std::cout << "warning: parameter outside the training box\n";
      if (r.e_u) std::cout << "e_u " << *r.e_u << "\ne_p " << *r.e_p << '\n';
    } else if (*study) {
      const auto r = run_study(c);
      std::cout << metrics::study_csv(r.rows, true) << "reports " << r.report_dir.string() << '\n';
    } else if (*diagnose) {
      std::cout << run_diagnose(c).dump(2) << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const DimensionError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
