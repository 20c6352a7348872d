#include <omp.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "adpp/alpha_sampler.hpp"
#include "adpp/bruteforce.hpp"
#include "adpp/dpp_exact.hpp"
#include "adpp/errors.hpp"
#include "adpp/io.hpp"
#include "adpp/kdpp.hpp"
#include "adpp/kernel.hpp"

namespace {

using adpp::ItemIndex;
using adpp::Matrix;
using json = nlohmann::ordered_json;

constexpr int kExitUsage = 2;
constexpr int kExitIngest = 3;
constexpr int kExitSampler = 4;

struct CommonOptions {
  std::string data_path;
  std::string format = "csv";
  bool header = false;
  std::string kernel = "rbf";
  double sigma = 1.0;
  std::int64_t synthetic_n = 0;
  int synthetic_d = 20;
  int k = 2;
  double q_bless = 2.0;
  double q_dpp = 1.0;
  std::string r = "auto";
  std::uint64_t seed = 42;
  bool deterministic = false;
};

void add_common_flags(CLI::App* cmd, CommonOptions* opt, bool needs_k) {
  cmd->add_option("--data", opt->data_path, "dataset path (one row per item)");
  cmd->add_option("--format", opt->format, "input format: csv or f32bin")
      ->check(CLI::IsMember({"csv", "f32bin"}));
  cmd->add_flag("--header", opt->header, "skip a CSV header line");
  cmd->add_option("--kernel", opt->kernel, "similarity function: rbf, linear or cosine")
      ->check(CLI::IsMember({"rbf", "linear", "cosine"}));
  cmd->add_option("--sigma", opt->sigma, "rbf bandwidth");
  cmd->add_option("--synthetic-n", opt->synthetic_n,
                  "generate a synthetic Gaussian-mixture dataset with this many items");
  cmd->add_option("--synthetic-d", opt->synthetic_d, "synthetic dataset dimension");
  auto* k_opt = cmd->add_option("--k", opt->k, "target subset size");
  if (needs_k) k_opt->required();
  cmd->add_option("--q-bless", opt->q_bless, "dictionary oversampling");
  cmd->add_option("--q-dpp", opt->q_dpp, "final-dictionary oversampling multiplier");
  cmd->add_option("--r", opt->r, "proposal oversampling, a number or 'auto'");
  cmd->add_option("--seed", opt->seed, "random seed");
  cmd->add_flag("--deterministic", opt->deterministic,
                "single-threaded run with zeroed timing fields; byte-stable output");
}

adpp::Matrix load_points(const CommonOptions& opt) {
  if (opt.synthetic_n > 0)
    return adpp::synthetic_gaussian_mixture(opt.synthetic_n, opt.synthetic_d, opt.seed);
  if (opt.data_path.empty())
    throw adpp::ConfigError("either --data or --synthetic-n is required");
  if (opt.format == "csv") return adpp::load_csv(opt.data_path, opt.header);
  return adpp::load_f32bin(opt.data_path);
}

adpp::KernelSource make_kernel(const CommonOptions& opt, Matrix points) {
  return adpp::KernelSource::from_features(std::move(points),
                                           adpp::kernel_function_from_name(opt.kernel), opt.sigma);
}

adpp::KdppConfig make_config(const CommonOptions& opt) {
  adpp::KdppConfig cfg;
  cfg.bless.q = opt.q_bless;
  cfg.bless.q_dpp = opt.q_dpp;
  if (opt.r != "auto") {
    try {
      std::size_t pos = 0;
      cfg.r = std::stod(opt.r, &pos);
      if (pos != opt.r.size()) throw std::invalid_argument(opt.r);
    } catch (const std::exception&) {
      throw adpp::ConfigError("--r expects a number or 'auto', got '" + opt.r + "'");
    }
  }
  const adpp::ExecMode mode =
      opt.deterministic ? adpp::ExecMode::Serial : adpp::ExecMode::Parallel;
  cfg.exec = mode;
  cfg.bless.exec = mode;
  return cfg;
}

json config_echo(const CommonOptions& opt) {
  json j;
  j["data"] = opt.synthetic_n > 0 ? "synthetic" : opt.data_path;
  j["format"] = opt.format;
  j["kernel"] = opt.kernel;
  j["sigma"] = opt.sigma;
  j["k"] = opt.k;
  j["q_bless"] = opt.q_bless;
  j["q_dpp"] = opt.q_dpp;
  j["r"] = opt.r;
  j["seed"] = opt.seed;
  j["deterministic"] = opt.deterministic;
  if (opt.synthetic_n > 0) {
    j["synthetic_n"] = opt.synthetic_n;
    j["synthetic_d"] = opt.synthetic_d;
  }
  return j;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

int run_sample(const CommonOptions& opt, int samples, const std::string& output,
               const std::string& dump_dictionary) {
  if (opt.deterministic) omp_set_num_threads(1);
  const adpp::KernelSource src = make_kernel(opt, load_points(opt));
  const adpp::KdppConfig cfg = make_config(opt);
  adpp::RandomStream rng(opt.seed);

  const auto t_setup = std::chrono::steady_clock::now();
  adpp::KdppPipeline pipeline(src, opt.k, cfg, rng);
  const double setup_seconds = seconds_since(t_setup);

  if (!dump_dictionary.empty() && !pipeline.trivial_full_set()) {
    std::ofstream out(dump_dictionary);
    if (!out) throw adpp::IngestError("cannot write " + dump_dictionary);
    out << "{\"dictionary\":"
        << adpp::dictionary_to_json(pipeline.bless().dictionary, pipeline.interval().alpha_max,
                                    pipeline.bless().q_final)
        << ",\"interval\":" << adpp::interval_to_json(pipeline.interval()) << "}\n";
  }

  json report;
  report["schema_version"] = 1;
  report["config"] = config_echo(opt);
  report["n"] = src.n();
  json pipe;
  pipe["alpha_min"] = pipeline.interval().alpha_min;
  pipe["alpha_max"] = pipeline.interval().alpha_max;
  pipe["alpha_hat"] = pipeline.alpha_hat();
  pipe["deff_estimate"] = pipeline.bless().deff_alpha_max;
  pipe["dictionary_size"] = pipeline.dictionary_size();
  pipe["search_steps"] = pipeline.search().steps;
  pipe["oracle_calls"] = pipeline.search().oracle_calls;
  pipe["low_confidence"] = pipeline.search().low_confidence;
  pipe["seconds_bless"] = opt.deterministic ? 0.0 : pipeline.seconds_bless();
  pipe["seconds_search"] = opt.deterministic ? 0.0 : pipeline.seconds_search();
  report["pipeline"] = pipe;

  json sample_rows = json::array();
  std::int64_t total_rejections = 0;
  double total_sampling_seconds = 0.0;
  for (int s = 0; s < samples; ++s) {
    adpp::SampleTrace trace;
    std::int64_t rejections = 0;
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<ItemIndex> subset = pipeline.draw(rng, &trace, &rejections);
    const double elapsed = seconds_since(t0);
    total_sampling_seconds += elapsed;
    total_rejections += rejections;

    json row;
    row["indices"] = subset;
    row["size_rejections"] = rejections;
    row["loop_iterations"] = trace.loop_iterations;
    row["beta_draw"] = trace.beta;
    row["seconds"] = opt.deterministic ? 0.0 : elapsed;
    sample_rows.push_back(std::move(row));
  }
  report["samples"] = std::move(sample_rows);

  json agg;
  agg["beta"] = pipeline.beta();
  agg["size_rejections"] = total_rejections;
  agg["seconds_setup"] = opt.deterministic ? 0.0 : setup_seconds;
  agg["seconds_sampling"] = opt.deterministic ? 0.0 : total_sampling_seconds;
  report["aggregate"] = std::move(agg);

  if (output == "json") {
    std::cout << report.dump(2) << "\n";
  } else {
    std::cout << "sample,k,alpha_hat,beta,m,deff,size_rejections,seconds,indices\n";
    for (int s = 0; s < samples; ++s) {
      const json& row = report["samples"][static_cast<std::size_t>(s)];
      std::string joined;
      for (const auto& idx : row["indices"]) {
        if (!joined.empty()) joined += ';';
        joined += std::to_string(idx.get<ItemIndex>());
      }
      std::cout << s << ',' << opt.k << ',' << pipeline.alpha_hat() << ',' << pipeline.beta()
                << ',' << pipeline.dictionary_size() << ',' << pipeline.bless().deff_alpha_max
                << ',' << row["size_rejections"].get<std::int64_t>() << ','
                << row["seconds"].get<double>() << ',' << joined << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

int run_bench(const CommonOptions& opt, const std::vector<std::int64_t>& n_grid, int reps) {
  std::cout << "n,mean_runtime,ci95,beta,m,alpha_hat\n";
  for (const std::int64_t n : n_grid) {
    std::vector<double> runtimes, betas, ms, alphas;
    for (int rep = 0; rep < reps; ++rep) {
      CommonOptions local = opt;
      local.synthetic_n = n;
      local.seed = opt.seed + static_cast<std::uint64_t>(rep) * 7919u;
      const adpp::KernelSource src = make_kernel(local, load_points(local));
      const adpp::KdppConfig cfg = make_config(local);
      adpp::RandomStream rng(local.seed);
      const auto t0 = std::chrono::steady_clock::now();
      const adpp::KdppResult result = adpp::sample_kdpp(src, local.k, cfg, rng);
      runtimes.push_back(seconds_since(t0));
      betas.push_back(result.beta);
      ms.push_back(static_cast<double>(result.dictionary_size));
      alphas.push_back(result.alpha_hat);
    }
    const auto mean = [](const std::vector<double>& v) {
      return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    const double mu = mean(runtimes);
    double var = 0.0;
    for (const double t : runtimes) var += (t - mu) * (t - mu);
    var = runtimes.size() > 1 ? var / static_cast<double>(runtimes.size() - 1) : 0.0;
    const double ci95 = 1.96 * std::sqrt(var / static_cast<double>(runtimes.size()));
    std::cout << n << ',' << mu << ',' << ci95 << ',' << mean(betas) << ',' << mean(ms) << ','
              << mean(alphas) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

struct GofCase {
  std::string name;
  int passes = 0;
  int runs = 0;
};

int run_validate(int n, int seeds, bool quick) {
  if (n < 2 || n > 10)
    throw adpp::Unsupported("validate supports 2 <= n <= 10, got " + std::to_string(n));
  if (quick) seeds = 1;
  const int draws = quick ? 5000 : 20000;
  const int k = 2;

  GofCase cases[4] = {{"alpha_dpp_full_dictionary"},
                      {"alpha_dpp_poor_dictionary"},
                      {"kdpp_end_to_end"},
                      {"exact_dpp_oracle"}};

  for (int seed = 0; seed < seeds; ++seed) {
    const adpp::KernelSource src =
        adpp::KernelSource::from_features(adpp::synthetic_gaussian_mixture(n, 3, 100 + seed),
                                          adpp::KernelFunction::Rbf, 3.0);
    const Matrix l = src.materialize();
    const adpp::Vector eigs = adpp::eigendecompose_psd(l).eigenvalues;
    double lo = 1e-9, hi = 1e9;
    for (int it = 0; it < 120; ++it) {
      const double mid = std::sqrt(lo * hi);
      (adpp::effective_dimension_spectrum(eigs, mid) < 2.0 ? lo : hi) = mid;
    }
    const double alpha = std::sqrt(lo * hi);

    const adpp::SubsetDistribution dpp_expected = adpp::enumerate_dpp(alpha * l);

    const auto gof_alpha_dpp = [&](adpp::Dictionary dict, std::uint64_t rng_seed) {
      adpp::AlphaSamplerConfig cfg;
      cfg.alpha = alpha;
      cfg.r = std::max(1.0, adpp::effective_dimension_spectrum(eigs, alpha));
      adpp::RescaledDppSampler sampler(src, std::move(dict), cfg);
      adpp::RandomStream rng(rng_seed);
      std::vector<std::int64_t> counts(dpp_expected.prob.size(), 0);
      for (int i = 0; i < draws; ++i)
        ++counts[adpp::subset_mask(sampler.sample(rng).first)];
      return adpp::chi_square_gof(counts, dpp_expected.prob);
    };

    // Full dictionary.
    ++cases[0].runs;
    if (gof_alpha_dpp(adpp::Dictionary::full(n), 9000 + seed) > 1e-3) ++cases[0].passes;

    // Deliberately poor two-item dictionary.
    adpp::Dictionary poor;
    poor.indices = {0, static_cast<ItemIndex>(n / 2)};
    poor.weights = {1.0, 1.0};
    ++cases[1].runs;
    if (gof_alpha_dpp(poor, 9100 + seed) > 1e-3) ++cases[1].passes;

    // End-to-end k-DPP against enumeration.
    {
      ++cases[2].runs;
      adpp::KdppConfig cfg;
      adpp::RandomStream rng(9200 + seed);
      adpp::KdppPipeline pipeline(src, k, cfg, rng);
      const adpp::SubsetDistribution expected = adpp::enumerate_kdpp(l, k);
      std::vector<std::int64_t> counts(expected.prob.size(), 0);
      for (int i = 0; i < draws; ++i) ++counts[adpp::subset_mask(pipeline.draw(rng))];
      if (adpp::chi_square_gof(counts, expected.prob) > 1e-3) ++cases[2].passes;
    }

    // The small exact sampler itself.
    {
      ++cases[3].runs;
      adpp::RandomStream rng(9300 + seed);
      std::vector<std::int64_t> counts(dpp_expected.prob.size(), 0);
      for (int i = 0; i < draws; ++i) ++counts[adpp::subset_mask(adpp::sample_dpp(alpha * l, rng))];
      if (adpp::chi_square_gof(counts, dpp_expected.prob) > 1e-3) ++cases[3].passes;
    }
  }

  bool all_ok = true;
  for (const GofCase& c : cases) {
    const int required = quick ? c.runs : (c.runs * 9 + 9) / 10;  // ceil(0.9 * runs)
    const bool ok = c.passes >= required;
    all_ok = all_ok && ok;
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.passes << "/" << c.runs
              << " seeds\n";
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact k-DPP sampling with sublinear item access"};
  app.require_subcommand(1);

  CommonOptions sample_opt;
  int samples = 1;
  std::string output = "json";
  std::string dump_dictionary;
  CLI::App* sample_cmd = app.add_subcommand("sample", "draw exact k-DPP samples");
  add_common_flags(sample_cmd, &sample_opt, true);
  sample_cmd->add_option("--samples", samples, "number of samples to draw");
  sample_cmd->add_option("--output", output, "output format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  sample_cmd->add_option("--dump-dictionary", dump_dictionary,
                         "write the dictionary and search interval as JSON to this path");

  CommonOptions bench_opt;
  bench_opt.k = 10;
  std::string n_grid_text = "10000,30000,100000";
  int reps = 3;
  CLI::App* bench_cmd = app.add_subcommand("bench", "runtime/beta sweep over dataset sizes");
  add_common_flags(bench_cmd, &bench_opt, false);
  bench_cmd->add_option("--n-grid", n_grid_text, "comma-separated dataset sizes");
  bench_cmd->add_option("--reps", reps, "repetitions per grid point");

  int validate_n = 6;
  int validate_seeds = 10;
  bool quick = false;
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "goodness-of-fit suite against brute-force enumeration");
  validate_cmd->add_option("--n", validate_n, "instance size (2..10)");
  validate_cmd->add_option("--seeds", validate_seeds, "number of seeds");
  validate_cmd->add_flag("--quick", quick, "single seed with reduced draw counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sample_cmd->parsed()) return run_sample(sample_opt, samples, output, dump_dictionary);
    if (bench_cmd->parsed()) {
      std::vector<std::int64_t> grid;
      std::stringstream ss(n_grid_text);
      std::string cell;
      while (std::getline(ss, cell, ',')) grid.push_back(std::stoll(cell));
      if (grid.empty()) throw adpp::ConfigError("--n-grid is empty");
      return run_bench(bench_opt, grid, reps);
    }
    return run_validate(validate_n, validate_seeds, quick);
  } catch (const adpp::IngestError& e) {
    std::cerr << "ingestion error: " << e.what() << "\n";
    return kExitIngest;
  } catch (const adpp::Unsupported& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return kExitUsage;
  } catch (const adpp::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const adpp::BudgetExhausted& e) {
    std::cerr << "sampler error: " << e.what() << "\n";
    if (!e.details.empty()) std::cerr << "trace: " << e.details << "\n";
    return kExitSampler;
  } catch (const std::exception& e) {
    std::cerr << "sampler error: " << e.what() << "\n";
    return kExitSampler;
  }
}
