// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bayeslsh/candidates.hpp"
#include "bayeslsh/corpus.hpp"
#include "bayeslsh/error.hpp"
#include "bayeslsh/eval.hpp"
#include "bayeslsh/inference.hpp"
#include "bayeslsh/search.hpp"

namespace py = pybind11;
using namespace bayeslsh;

namespace {

using RawVector = std::pair<std::string, std::vector<std::pair<FeatureId, double>>>;

Corpus make_corpus(const std::vector<RawVector>& raw, const std::string& measure) {
  std::vector<SparseVector> vectors;
  vectors.reserve(raw.size());
  for (const auto& [id, entries] : raw) {
    SparseVector v{id, {}};
    for (const auto& [f, w] : entries) v.entries.push_back({f, w});
    vectors.push_back(std::move(v));
  }
  return Corpus(std::move(vectors), parse_measure_mode(measure));
}

PosteriorModel posterior_for(const std::string& measure, double alpha, double beta) {
  if (measure_of(parse_measure_mode(measure)) == Measure::kCosine) return PosteriorModel::cosine();
  return PosteriorModel::jaccard({alpha, beta});
}

py::tuple pair_tuple(const OutputPair& p) {
  return py::make_tuple(p.i, p.j, p.estimate, p.exact, p.low_confidence, p.hashes_used);
}

}  // namespace

PYBIND11_MODULE(_bayeslsh, m) {
  m.doc() = "BayesLSH candidate pruning and similarity estimation";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<GuardError>(m, "GuardError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ContractViolation>(m, "ContractViolation", base.ptr());

  py::class_<Corpus>(m, "Corpus")
      .def(py::init(&make_corpus), py::arg("vectors"), py::arg("measure") = "cosine",
           "Build from [(id, [(feature, weight), ...]), ...].")
      .def_static(
          "load",
          [](const std::string& path, const std::string& measure, bool tfidf) {
            return load_corpus(path, parse_measure_mode(measure),
                               tfidf ? Weighting::kTfIdf : Weighting::kNone);
          },
          py::arg("path"), py::arg("measure") = "cosine", py::arg("tfidf") = false)
      .def_static(
          "parse",
          [](const std::string& text, const std::string& measure) {
            std::istringstream in(text);
            return parse_corpus(in, parse_measure_mode(measure));
          },
          py::arg("text"), py::arg("measure") = "cosine")
      .def("__len__", &Corpus::size)
      .def_property_readonly("measure",
                             [](const Corpus& c) { return std::string(to_string(c.mode())); })
      .def_property_readonly("ids",
                             [](const Corpus& c) {
                               std::vector<std::string> ids;
                               for (const auto& v : c.vectors()) ids.push_back(v.id);
                               return ids;
                             })
      .def(
          "vector",
          [](const Corpus& c, std::size_t i) {
            if (i >= c.size()) throw py::index_error("object index out of range");
            std::vector<std::pair<FeatureId, double>> out;
            for (const auto& e : c[i].entries) out.emplace_back(e.feature, e.weight);
            return out;
          },
          py::arg("i"))
      .def(
          "similarity",
          [](const Corpus& c, std::size_t i, std::size_t j) {
            if (i >= c.size() || j >= c.size()) {
              throw py::index_error("object index out of range");
            }
            return exact_similarity(c, i, j);
          },
          py::arg("i"), py::arg("j"))
      .def("to_text", [](const Corpus& c) {
        std::ostringstream out;
        write_corpus(out, c);
        return out.str();
      });

  m.def(
      "generate_synthetic",
      [](std::size_t n, const std::vector<std::pair<double, std::size_t>>& planted,
         std::size_t dim, std::size_t features, const std::string& measure, std::uint64_t seed) {
        SyntheticSpec spec;
        spec.n = n;
        spec.dim = dim;
        spec.features_per_vector = features;
        spec.mode = parse_measure_mode(measure);
        spec.seed = seed;
        for (const auto& [sim, count] : planted) spec.planted.push_back({count, sim});
        return generate_synthetic(spec);
      },
      py::arg("n"), py::arg("planted") = std::vector<std::pair<double, std::size_t>>{},
      py::arg("dim") = 5000, py::arg("features") = 40, py::arg("measure") = "cosine",
      py::arg("seed") = 0, "Planted groups are (similarity, pair count).");

  py::class_<SearchConfig>(m, "SearchConfig")
      .def(py::init<>())
      .def_property(
          "measure", [](const SearchConfig& c) { return std::string(to_string(c.mode)); },
          [](SearchConfig& c, const std::string& s) { c.mode = parse_measure_mode(s); })
      .def_property(
          "generator", [](const SearchConfig& c) { return std::string(to_string(c.generator)); },
          [](SearchConfig& c, const std::string& s) { c.generator = parse_generator(s); })
      .def_property(
          "verifier", [](const SearchConfig& c) { return std::string(to_string(c.verifier)); },
          [](SearchConfig& c, const std::string& s) { c.verifier = parse_verifier(s); })
      .def_readwrite("threshold", &SearchConfig::threshold)
      .def_readwrite("epsilon", &SearchConfig::epsilon)
      .def_readwrite("delta", &SearchConfig::delta)
      .def_readwrite("gamma", &SearchConfig::gamma)
      .def_readwrite("batch_hashes", &SearchConfig::batch)
      .def_readwrite("lite_hashes", &SearchConfig::lite_hashes)
      .def_readwrite("max_hashes", &SearchConfig::max_hashes)
      .def_readwrite("fixed_hashes", &SearchConfig::fixed_hashes)
      .def_readwrite("seed", &SearchConfig::seed)
      .def_readwrite("band_width", &SearchConfig::band_width)
      .def_readwrite("fn_rate", &SearchConfig::fn_rate)
      .def_readwrite("fresh_verification_hashes", &SearchConfig::fresh_verification_hashes)
      .def_readwrite("use_cache", &SearchConfig::use_cache)
      .def_readwrite("fit_prior", &SearchConfig::fit_prior)
      .def_readwrite("max_candidates", &SearchConfig::max_candidates)
      .def_readwrite("threads", &SearchConfig::threads);

  m.def(
      "search",
      [](const Corpus& corpus, SearchConfig config, bool with_eval) {
        config.mode = corpus.mode();
        SearchResult result;
        {
          py::gil_scoped_release release;
          result = search(corpus, config);
        }
        py::list pairs;
        for (const auto& p : result.pairs) pairs.append(pair_tuple(p));
        py::dict out;
        out["pairs"] = pairs;
        out["candidates"] = result.candidates;
        out["survivors"] = result.stats.survivors;
        if (with_eval) {
          std::string report;
          {
            py::gil_scoped_release release;
            const SearchConfig r = config.resolved();
            report = eval_json(evaluate(corpus, r, result, ground_truth(corpus, r.threshold,
                                                                         r.threads)));
          }
          out["eval"] = py::module_::import("json").attr("loads")(report);
        }
        return out;
      },
      py::arg("corpus"), py::arg("config") = SearchConfig{}, py::arg("evaluate") = false,
      "Returns {'pairs': [(i, j, estimate, exact, low_confidence, hashes_used)], ...}.");

  m.def(
      "ground_truth",
      [](const Corpus& corpus, double threshold, unsigned threads) {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
        for (const auto& p : ground_truth(corpus, threshold, threads)) out.emplace_back(p.i, p.j);
        return out;
      },
      py::arg("corpus"), py::arg("threshold"), py::arg("threads") = 1);

  m.def("required_hashes",
        [](double s, double delta, double gamma) { return required_hashes(s, delta, gamma); },
        py::arg("s"), py::arg("delta") = 0.05, py::arg("gamma") = 0.05);
  m.def("num_tables", &num_tables, py::arg("eps_fn"), py::arg("t"), py::arg("b"));
  m.def(
      "ml_estimate",
      [](std::uint32_t mt, std::uint32_t n, const std::string& measure) {
        return ml_estimate(mt, n, measure_of(parse_measure_mode(measure)));
      },
      py::arg("m"), py::arg("n"), py::arg("measure") = "jaccard");
  m.def(
      "prune_probability",
      [](std::uint32_t mt, std::uint32_t n, double t, const std::string& measure, double alpha,
         double beta) { return posterior_for(measure, alpha, beta).prune_probability(mt, n, t); },
      py::arg("m"), py::arg("n"), py::arg("t"), py::arg("measure") = "jaccard",
      py::arg("alpha") = 1.0, py::arg("beta") = 1.0, "Posterior Pr[S >= t | m of n].");
  m.def(
      "map_estimate",
      [](std::uint32_t mt, std::uint32_t n, const std::string& measure, double alpha,
         double beta) { return posterior_for(measure, alpha, beta).map_estimate(mt, n); },
      py::arg("m"), py::arg("n"), py::arg("measure") = "jaccard", py::arg("alpha") = 1.0,
      py::arg("beta") = 1.0);
  m.def(
      "min_matches",
      [](double t, double epsilon, std::size_t batch, std::size_t max_hashes,
         const std::string& measure, double alpha, double beta) {
        return MinMatchTable::build(posterior_for(measure, alpha, beta), t, epsilon, batch,
                                    max_hashes)
            .entries();
      },
      py::arg("t"), py::arg("epsilon") = 0.03, py::arg("batch") = 32,
      py::arg("max_hashes") = 512, py::arg("measure") = "jaccard", py::arg("alpha") = 1.0,
      py::arg("beta") = 1.0, "minMatches at n = batch, 2*batch, ..., max_hashes.");
}
