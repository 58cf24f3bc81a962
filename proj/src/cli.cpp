// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

#include "bayeslsh/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "bayeslsh/candidates.hpp"
#include "bayeslsh/corpus.hpp"
#include "bayeslsh/error.hpp"
#include "bayeslsh/eval.hpp"
#include "bayeslsh/hashing.hpp"
#include "bayeslsh/inference.hpp"
#include "bayeslsh/search.hpp"
#include "bayeslsh/util.hpp"

namespace bayeslsh {

namespace {

struct CommonFlags {
  std::string input;
  std::string measure = "cosine";
  bool tfidf = false;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string output;
};

struct SearchFlags {
  CommonFlags common;
  SearchConfig config;
  std::string generator = "lsh";
  std::string verifier = "bayeslsh";
  std::string candidates_in;
  std::string signatures_out;
  bool eval = false;
  std::string eval_tsv;
  std::string eval_json;
  bool no_cache = false;
};

// Sink that is either the caller's stream or a file.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback, bool binary = false) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
      return;
    }
    file_.open(path, binary ? std::ios::binary | std::ios::out : std::ios::out);
    if (!file_) throw IoError(fmt::format("cannot open '{}' for writing", path));
    stream_ = &file_;
  }
  std::ostream& stream() { return *stream_; }
  void close(const std::string& path) {
    if (file_.is_open()) {
      file_.close();
      if (!file_) throw IoError(fmt::format("failed writing '{}'", path));
    }
  }

 private:
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

std::uint64_t effective_seed(const CommonFlags& f, std::ostream& err) {
  std::uint64_t seed = 0;
  if (f.seed) {
    seed = *f.seed;
  } else {
    std::random_device rd;
    seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  fmt::print(err, "seed: {}\n", seed);
  return seed;
}

void add_common(CLI::App* app, CommonFlags& f, bool needs_input) {
  auto* in = app->add_option("-i,--input", f.input, "Corpus file");
  if (needs_input) in->required();
  app->add_option("--measure", f.measure,
                  "cosine | cosine-weighted | cosine-binary | jaccard")
      ->capture_default_str();
  app->add_flag("--tfidf", f.tfidf, "Apply tf-idf weighting (cosine-weighted only)");
  app->add_option("--seed", f.seed, "RNG seed (random when omitted; always printed)");
  app->add_option("--threads", f.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();
  app->add_option("-o,--output", f.output, "Output path (default stdout)");
}

void add_search(CLI::App* app, SearchFlags& f) {
  add_common(app, f.common, true);
  auto& c = f.config;
  app->add_option("--threshold", c.threshold)->capture_default_str();
  app->add_option("--epsilon", c.epsilon, "Recall parameter")->capture_default_str();
  app->add_option("--delta", c.delta, "Accuracy tolerance")->capture_default_str();
  app->add_option("--gamma", c.gamma, "Accuracy failure probability")->capture_default_str();
  app->add_option("--batch-hashes", c.batch, "Hashes compared per step (k)")
      ->capture_default_str();
  app->add_option("--lite-hashes", c.lite_hashes, "BayesLSH-Lite hash budget h (0 = default)");
  app->add_option("--max-hashes", c.max_hashes, "Hash cap per object (0 = default)");
  app->add_option("--fixed-hashes", c.fixed_hashes, "LSH-Approx hash count (0 = default)");
  app->add_option("--generator", f.generator, "lsh | allpairs | bruteforce")
      ->capture_default_str();
  app->add_option("--verifier", f.verifier, "bayeslsh | bayeslsh-lite | lsh-approx | exact")
      ->capture_default_str();
  app->add_option("--band-width", c.band_width, "Hashes per band (0 = widest that fits)");
  app->add_option("--fn-rate", c.fn_rate, "Banding false-negative rate")->capture_default_str();
  app->add_flag("--fresh-verification-hashes", c.fresh_verification_hashes,
                "Verify with hashes independent of candidate generation");
  app->add_flag("--no-cache", f.no_cache, "Disable the concentration cache");
  app->add_option("--max-candidates", c.max_candidates)->capture_default_str();
  app->add_option("--candidates-in", f.candidates_in, "Verify a saved candidate stream");
  app->add_option("--signatures-out", f.signatures_out, "Dump signatures after the run");
  app->add_flag("--eval", f.eval, "Score against brute-force truth");
  app->add_option("--eval-tsv", f.eval_tsv, "EvalReport TSV path (default stderr)");
  app->add_option("--eval-json", f.eval_json, "EvalReport JSON-lines path (default stderr)");
}

Corpus load_input(const CommonFlags& f) {
  const MeasureMode mode = parse_measure_mode(f.measure);
  if (f.tfidf && mode != MeasureMode::kCosineWeighted) {
    throw UsageError("--tfidf applies to the cosine-weighted measure only");
  }
  return load_corpus(f.input, mode, f.tfidf ? Weighting::kTfIdf : Weighting::kNone);
}

SearchConfig finish_config(SearchFlags& f, std::uint64_t seed) {
  SearchConfig c = f.config;
  c.mode = parse_measure_mode(f.common.measure);
  c.seed = seed;
  c.threads = f.common.threads;
  c.generator = parse_generator(f.generator);
  c.verifier = parse_verifier(f.verifier);
  c.use_cache = !f.no_cache;
  if (c.generator == Generator::kAllPairs && c.measure() == Measure::kJaccard) {
    throw UsageError("the allpairs generator supports cosine measures only");
  }
  return c.resolved();
}

std::vector<std::string> config_header(const SearchConfig& c) {
  return {
      fmt::format("seed: {}", c.seed),
      fmt::format("measure: {}", to_string(c.mode)),
      fmt::format("threshold: {}", c.threshold),
      fmt::format("generator: {}", to_string(c.generator)),
      fmt::format("verifier: {}", to_string(c.verifier)),
      fmt::format("epsilon: {} delta: {} gamma: {}", c.epsilon, c.delta, c.gamma),
      fmt::format("batch_hashes: {} lite_hashes: {} max_hashes: {}", c.batch, c.lite_hashes,
                  c.max_hashes),
  };
}

SearchResult run_pipeline(const Corpus& corpus, const SearchConfig& cfg, const SearchFlags& f) {
  if (f.candidates_in.empty() && f.signatures_out.empty()) return search(corpus, cfg);
  SearchResult result;
  SignatureStore store(corpus, SignatureConfig{cfg.seed, cfg.batch, cfg.max_hashes, cfg.threads});
  CandidateSet candidates = f.candidates_in.empty()
                                ? generate_candidates(corpus, cfg, store, &result.banding,
                                                      &result.seconds)
                                : load_candidates(f.candidates_in);
  result.candidates = candidates.size();
  const auto start = std::chrono::steady_clock::now();
  result.pairs = verify_candidates(corpus, candidates, cfg, store, &result.stats);
  result.seconds.verification =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!f.signatures_out.empty()) store.save(f.signatures_out);
  return result;
}

int cmd_search(SearchFlags& f, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = effective_seed(f.common, err);
  SearchConfig cfg = finish_config(f, seed);
  const Corpus corpus = load_input(f.common);
  const SearchResult result = run_pipeline(corpus, cfg, f);

  Output sink(f.common.output, out);
  write_results_tsv(sink.stream(), corpus, result.pairs, config_header(cfg));
  sink.close(f.common.output);

  if (f.eval) {
    const auto start = std::chrono::steady_clock::now();
    const CandidateSet truth = ground_truth(corpus, cfg.threshold, cfg.threads);
    EvalReport report = evaluate(corpus, cfg, result, truth);
    report.truth_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Output tsv(f.eval_tsv, err);
    write_eval_tsv(tsv.stream(), report);
    tsv.close(f.eval_tsv);
    Output json(f.eval_json, err);
    json.stream() << eval_json(report) << '\n';
    json.close(f.eval_json);
  }
  return kExitOk;
}

int cmd_pruning_curve(SearchFlags& f, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = effective_seed(f.common, err);
  f.verifier = "bayeslsh";
  SearchConfig cfg = finish_config(f, seed);
  const Corpus corpus = load_input(f.common);
  const SearchResult result = run_pipeline(corpus, cfg, f);
  Output sink(f.common.output, out);
  auto& os = sink.stream();
  for (const auto& line : config_header(cfg)) fmt::print(os, "# {}\n", line);
  fmt::print(os, "# candidates: {}\n", result.candidates);
  os << "# hashes\tsurviving\tfraction\n";
  fmt::print(os, "0\t{}\t{:.6f}\n", result.candidates, result.candidates == 0 ? 0.0 : 1.0);
  for (std::size_t b = 0; b < result.stats.survivors.size(); ++b) {
    const std::size_t s = result.stats.survivors[b];
    const double frac =
        result.candidates == 0 ? 0.0 : static_cast<double>(s) / result.candidates;
    fmt::print(os, "{}\t{}\t{:.6f}\n", (b + 1) * cfg.batch, s, frac);
  }
  sink.close(f.common.output);
  return kExitOk;
}

int cmd_candidates(SearchFlags& f, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = effective_seed(f.common, err);
  SearchConfig cfg = finish_config(f, seed);
  if (f.common.output.empty()) throw UsageError("candidates needs --output for the binary stream");
  const Corpus corpus = load_input(f.common);
  SignatureStore store(corpus, SignatureConfig{cfg.seed, cfg.batch, cfg.max_hashes, cfg.threads});
  std::optional<BandingParams> banding;
  const CandidateSet c = generate_candidates(corpus, cfg, store, &banding);
  save_candidates(f.common.output, c);
  if (!f.signatures_out.empty()) store.save(f.signatures_out);
  fmt::print(out, "# candidates\t{}\n", c.size());
  if (banding) fmt::print(out, "# band_width\t{}\n# tables\t{}\n", banding->b, banding->l);
  return kExitOk;
}

struct RequiredFlags {
  double delta = 0.05;
  double gamma = 0.05;
  double s_min = 0.05;
  double s_max = 0.95;
  double s_step = 0.05;
  std::size_t hash_step = 16;
  std::string rounding = "outward";
  std::string output;
};

int cmd_required_hashes(const RequiredFlags& f, std::ostream& out) {
  if (!(f.s_step > 0.0) || f.s_min > f.s_max) throw UsageError("invalid similarity grid");
  RequiredHashesOptions opt;
  opt.step = f.hash_step;
  if (f.rounding == "outward") {
    opt.rounding = BoundRounding::kOutward;
  } else if (f.rounding == "inward") {
    opt.rounding = BoundRounding::kInward;
  } else {
    throw UsageError(fmt::format("unknown rounding '{}' (outward, inward)", f.rounding));
  }
  Output sink(f.output, out);
  auto& os = sink.stream();
  fmt::print(os, "# delta: {} gamma: {} rounding: {} hash_step: {}\n", f.delta, f.gamma,
             f.rounding, f.hash_step);
  os << "# s\tn\n";
  const auto steps = static_cast<long>(std::floor((f.s_max - f.s_min) / f.s_step + 1e-9));
  for (long i = 0; i <= steps; ++i) {
    const double s = f.s_min + i * f.s_step;
    fmt::print(os, "{:.4f}\t{}\n", s, required_hashes(s, f.delta, f.gamma, opt));
  }
  sink.close(f.output);
  return kExitOk;
}

struct PriorDemoFlags {
  std::vector<std::string> mn = {"0:0", "24:32", "48:64", "96:128"};
  std::vector<double> exponents = {-3.0, 0.0, 3.0};
  std::size_t gridpoints = 101;
  std::string output;
};

int cmd_prior_demo(const PriorDemoFlags& f, std::ostream& out) {
  struct Obs {
    std::uint32_t m;
    std::uint32_t n;
  };
  std::vector<Obs> obs;
  for (const auto& s : f.mn) {
    unsigned m = 0;
    unsigned n = 0;
    char colon = 0;
    std::istringstream is(s);
    if (!(is >> m >> colon >> n) || colon != ':' || m > n || !is.eof()) {
      throw UsageError(fmt::format("bad m:n pair '{}'", s));
    }
    obs.push_back({m, n});
  }
  if (f.exponents.empty()) throw UsageError("need at least one exponent");
  std::vector<std::vector<std::vector<DensityPoint>>> grids;
  for (const auto& o : obs) {
    auto& row = grids.emplace_back();
    for (double e : f.exponents) row.push_back(power_law_posterior_grid(e, o.m, o.n, f.gridpoints));
  }
  Output sink(f.output, out);
  auto& os = sink.stream();
  os << "# max_gap between the first and last exponent\n";
  for (std::size_t k = 0; k < obs.size(); ++k) {
    fmt::print(os, "# max_gap\t{}\t{}\t{:.6f}\n", obs[k].m, obs[k].n,
               max_density_gap(grids[k].front(), grids[k].back()));
  }
  os << "# exponent\tm\tn\tr\tdensity\n";
  for (std::size_t k = 0; k < obs.size(); ++k) {
    for (std::size_t e = 0; e < f.exponents.size(); ++e) {
      for (const auto& p : grids[k][e]) {
        fmt::print(os, "{}\t{}\t{}\t{:.6f}\t{:.6f}\n", f.exponents[e], obs[k].m, obs[k].n, p.r,
                   p.density);
      }
    }
  }
  sink.close(f.output);
  return kExitOk;
}

struct GenFlags {
  std::size_t n = 2000;
  std::size_t dim = 5000;
  std::size_t features = 40;
  std::vector<std::string> planted = {"0.55:100", "0.75:100", "0.95:100"};
  std::string measure = "cosine";
  std::optional<std::uint64_t> seed;
  std::string output;
};

int cmd_gen(const GenFlags& f, std::ostream& out, std::ostream& err) {
  SyntheticSpec spec;
  spec.n = f.n;
  spec.dim = f.dim;
  spec.features_per_vector = f.features;
  spec.mode = parse_measure_mode(f.measure);
  CommonFlags seed_flags;
  seed_flags.seed = f.seed;
  spec.seed = effective_seed(seed_flags, err);
  for (const auto& s : f.planted) {
    if (s.empty() || s == "none") continue;
    double sim = 0.0;
    std::size_t count = 0;
    char colon = 0;
    std::istringstream is(s);
    if (!(is >> sim >> colon >> count) || colon != ':' || !is.eof()) {
      throw UsageError(fmt::format("bad planted group '{}' (expected similarity:pairs)", s));
    }
    spec.planted.push_back({count, sim});
  }
  const Corpus corpus = generate_synthetic(spec);
  Output sink(f.output, out);
  fmt::print(sink.stream(), "# synthetic corpus: n={} dim={} measure={} seed={}\n", f.n, f.dim,
             to_string(spec.mode), spec.seed);
  write_corpus(sink.stream(), corpus);
  sink.close(f.output);
  return kExitOk;
}

struct TableFlags {
  std::string measure = "cosine";
  double threshold = 0.7;
  double epsilon = 0.03;
  std::size_t batch = 32;
  std::size_t max_hashes = 0;
  double alpha = 1.0;
  double beta = 1.0;
  std::string output;
};

int cmd_table(const TableFlags& f, std::ostream& out) {
  const Measure measure = measure_of(parse_measure_mode(f.measure));
  const BetaParams prior{f.alpha, f.beta};
  prior.validate();
  const PosteriorModel posterior =
      measure == Measure::kCosine ? PosteriorModel::cosine() : PosteriorModel::jaccard(prior);
  const std::size_t cap = f.max_hashes == 0 ? default_max_hashes(measure) : f.max_hashes;
  if (f.batch == 0 || cap % f.batch != 0) {
    throw UsageError("max-hashes must be a positive multiple of batch-hashes");
  }
  const MinMatchTable table = MinMatchTable::build(posterior, f.threshold, f.epsilon, f.batch, cap);
  Output sink(f.output, out);
  fmt::print(sink.stream(), "# measure: {} threshold: {} epsilon: {}\n", to_string(measure),
             f.threshold, f.epsilon);
  table.write_tsv(sink.stream());
  sink.close(f.output);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"BayesLSH all-pairs similarity search"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "bayeslsh 0.1.0");

  SearchFlags search_flags;
  auto* search_cmd = app.add_subcommand("search", "Generate and verify candidate pairs");
  add_search(search_cmd, search_flags);

  SearchFlags curve_flags;
  auto* curve_cmd =
      app.add_subcommand("pruning-curve", "Surviving candidates after each hash batch");
  add_search(curve_cmd, curve_flags);

  SearchFlags cand_flags;
  auto* cand_cmd = app.add_subcommand("candidates", "Write the binary candidate stream");
  add_search(cand_cmd, cand_flags);

  RequiredFlags req_flags;
  auto* req_cmd = app.add_subcommand(
      "required-hashes", "Hashes the ML estimator needs for a (delta, gamma) guarantee");
  req_cmd->add_option("--delta", req_flags.delta)->capture_default_str();
  req_cmd->add_option("--gamma", req_flags.gamma)->capture_default_str();
  req_cmd->add_option("--s-min", req_flags.s_min)->capture_default_str();
  req_cmd->add_option("--s-max", req_flags.s_max)->capture_default_str();
  req_cmd->add_option("--s-step", req_flags.s_step)->capture_default_str();
  req_cmd->add_option("--hash-step", req_flags.hash_step)->capture_default_str();
  req_cmd->add_option("--rounding", req_flags.rounding, "outward | inward")
      ->capture_default_str();
  req_cmd->add_option("-o,--output", req_flags.output);

  PriorDemoFlags prior_flags;
  auto* prior_cmd =
      app.add_subcommand("prior-demo", "Posterior densities under power-law priors");
  prior_cmd->add_option("--mn", prior_flags.mn, "Observations as m:n")->delimiter(',')
      ->capture_default_str();
  prior_cmd->add_option("--exponents", prior_flags.exponents)->delimiter(',')
      ->capture_default_str();
  prior_cmd->add_option("--gridpoints", prior_flags.gridpoints)->capture_default_str();
  prior_cmd->add_option("-o,--output", prior_flags.output);

  GenFlags gen_flags;
  auto* gen_cmd = app.add_subcommand("gen", "Write a synthetic corpus with planted pairs");
  gen_cmd->add_option("-n,--objects", gen_flags.n)->capture_default_str();
  gen_cmd->add_option("--dim", gen_flags.dim)->capture_default_str();
  gen_cmd->add_option("--features", gen_flags.features, "Features per object")
      ->capture_default_str();
  gen_cmd->add_option("--planted", gen_flags.planted, "Groups as similarity:pairs ('none' for no planted pairs)")
      ->delimiter(',')->capture_default_str();
  gen_cmd->add_option("--measure", gen_flags.measure)->capture_default_str();
  gen_cmd->add_option("--seed", gen_flags.seed);
  gen_cmd->add_option("-o,--output", gen_flags.output);

  TableFlags table_flags;
  auto* table_cmd = app.add_subcommand("table", "Print the minMatches table");
  table_cmd->add_option("--measure", table_flags.measure)->capture_default_str();
  table_cmd->add_option("--threshold", table_flags.threshold)->capture_default_str();
  table_cmd->add_option("--epsilon", table_flags.epsilon)->capture_default_str();
  table_cmd->add_option("--batch-hashes", table_flags.batch)->capture_default_str();
  table_cmd->add_option("--max-hashes", table_flags.max_hashes);
  table_cmd->add_option("--alpha", table_flags.alpha, "Jaccard prior alpha")
      ->capture_default_str();
  table_cmd->add_option("--beta", table_flags.beta, "Jaccard prior beta")->capture_default_str();
  table_cmd->add_option("-o,--output", table_flags.output);

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("bayeslsh");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return static_cast<int>(ErrorKind::kUsage);
  }

  try {
    if (*search_cmd) return cmd_search(search_flags, out, err);
    if (*curve_cmd) return cmd_pruning_curve(curve_flags, out, err);
    if (*cand_cmd) return cmd_candidates(cand_flags, out, err);
    if (*req_cmd) return cmd_required_hashes(req_flags, out);
    if (*prior_cmd) return cmd_prior_demo(prior_flags, out);
    if (*gen_cmd) return cmd_gen(gen_flags, out, err);
    if (*table_cmd) return cmd_table(table_flags, out);
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUnexpected;
  }
  return kExitOk;
}

}  // namespace bayeslsh
