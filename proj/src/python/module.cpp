#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rulehound/corpus.hpp"
#include "rulehound/detect.hpp"
#include "rulehound/errors.hpp"
#include "rulehound/eval.hpp"
#include "rulehound/mine.hpp"
#include "rulehound/model.hpp"
#include "rulehound/patch.hpp"
#include "rulehound/rules.hpp"
#include "rulehound/text.hpp"

namespace py = pybind11;
using namespace rulehound;

namespace {

py::dict span_to_dict(const FunctionSpan& s) {
    py::dict d;
    d["file"] = s.file;
    d["name"] = s.name;
    d["start"] = s.start;
    d["end"] = s.end;
    d["header"] = s.header;
    d["body"] = s.body;
    d["degraded"] = s.degraded;
    return d;
}

py::dict candidate_to_dict(const CallSiteCandidate& c) {
    py::dict d;
    d["id"] = c.id;
    d["file"] = c.span.file;
    d["function"] = c.span.name;
    d["target"] = c.target;
    d["offsets"] = c.offsets;
    d["body"] = c.span.body;
    return d;
}

py::dict rule_to_dict(const SecurityRule& r) {
    py::dict d;
    d["id"] = r.id;
    d["template_id"] = r.template_id;
    d["slots"] = r.slots;
    d["text"] = r.text;
    d["match_mode"] = to_string(r.match_mode);
    d["low_confidence"] = r.low_confidence;
    return d;
}

py::dict metrics_to_dict(const Metrics& m) {
    py::dict d;
    d["tp"] = m.counts.tp;
    d["fp"] = m.counts.fp;
    d["fn"] = m.counts.fn;
    d["tn"] = m.counts.tn;
    d["undecided"] = m.counts.undecided;
    d["pairs_total"] = m.counts.pairs_total;
    d["pairs_correct"] = m.counts.pairs_correct;
    d["precision"] = m.precision ? py::object(py::float_(*m.precision)) : py::none();
    d["recall"] = m.recall ? py::object(py::float_(*m.recall)) : py::none();
    d["pairwise_accuracy"] =
        m.pairwise_accuracy ? py::object(py::float_(*m.pairwise_accuracy)) : py::none();
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Patch-seeded security rule extraction and rule-violation scanning";

    py::register_exception<ParseError>(m, "ParseError");
    py::register_exception<ConfigError>(m, "ConfigError");

    m.def("strip_comments_and_strings",
          [](const std::string& s) { return text::strip_comments_and_strings(s); },
          py::arg("source"));

    m.def(
        "extract_functions",
        [](const std::string& source) {
            py::list out;
            for (const auto& span : extract_functions(source)) out.append(span_to_dict(span));
            return out;
        },
        py::arg("source"));

    py::class_<SourceCorpus>(m, "Corpus")
        .def_property_readonly("files",
                               [](const SourceCorpus& c) {
                                   py::list out;
                                   for (const auto& f : c.files) out.append(f.path);
                                   return out;
                               })
        .def_property_readonly("scan_log", [](const SourceCorpus& c) { return c.scan_log; })
        .def("enumerate_call_sites",
             [](const SourceCorpus& c, const std::string& target, const std::string& mode) {
                 py::list out;
                 for (const auto& cand :
                      enumerate_call_sites(c, target, match_mode_from_string(mode)))
                     out.append(candidate_to_dict(cand));
                 return out;
             },
             py::arg("target"), py::arg("mode") = "call");

    m.def(
        "load_corpus",
        [](const std::filesystem::path& root, const std::vector<std::string>& globs) {
            return load_corpus(root, globs);
        },
        py::arg("root"), py::arg("include_globs") = std::vector<std::string>{});

    m.def(
        "parse_commit_message",
        [](const std::string& raw) {
            ParsedCommit c = parse_commit(raw);
            py::dict d;
            d["commit_id"] = c.commit_id;
            d["message"] = c.message;
            d["cleaned"] = clean_metadata(c);
            d["files"] = [&]() {
                py::list out;
                for (const auto& diff : c.diffs) out.append(diff.pre_image_path());
                return out;
            }();
            return d;
        },
        py::arg("raw"), "Parse a commit and return its id, message and cleaned description");

    m.def(
        "build_detection_prompt",
        [](const std::string& config, const std::string& code, py::object rule,
           py::object patch) {
            std::optional<std::string> rule_text;
            std::optional<std::string> patch_text;
            if (!rule.is_none()) rule_text = rule.cast<std::string>();
            if (!patch.is_none()) patch_text = patch.cast<std::string>();
            return build_detection_prompt(prompt_config_from_string(config), code, rule_text,
                                          patch_text);
        },
        py::arg("config"), py::arg("code"), py::arg("rule") = py::none(),
        py::arg("patch") = py::none());

    m.def("extract_verdict", [](const std::string& completion) {
        return to_string(extract_verdict(completion).kind);
    });

    m.def(
        "parse_rule_response",
        [](const std::string& completion) {
            py::list out;
            for (const auto& r : parse_rule_response(completion).rules)
                out.append(rule_to_dict(r));
            return out;
        },
        py::arg("completion"));

    m.def("render_rule",
          [](int template_id, const std::map<std::string, std::string>& slots) {
              return render_rule(template_id, slots);
          });

    m.def("count_tokens", [](const std::string& t) { return count_tokens(t); });

    m.def(
        "estimate_cost",
        [](long input_tokens, long output_tokens, double input_per_1k, double output_per_1k) {
            PriceTable table;
            table.prices["m"] = {input_per_1k, output_per_1k};
            return estimate_cost({input_tokens, output_tokens, false}, "m", table);
        },
        py::arg("input_tokens"), py::arg("output_tokens"), py::arg("input_per_1k"),
        py::arg("output_per_1k"));

    m.def(
        "compute_metrics",
        [](long tp, long fp, long fn, long tn, long undecided, long pairs_total,
           long pairs_correct) {
            Confusion c{tp, fp, fn, tn, undecided, pairs_total, pairs_correct};
            return metrics_to_dict(compute_metrics(c));
        },
        py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn") = 0,
        py::arg("undecided") = 0, py::arg("pairs_total") = 0, py::arg("pairs_correct") = 0);

    m.def(
        "cluster_vectors",
        [](const std::vector<std::vector<double>>& vectors, double eps, size_t min_pts) {
            std::vector<RuleEmbedding> embs;
            for (size_t i = 0; i < vectors.size(); ++i) {
                RuleEmbedding e;
                e.rule_id = std::to_string(i);
                e.v = vectors[i];
                double sq = 0;
                for (double x : e.v) sq += x * x;
                e.norm = std::sqrt(sq);
                embs.push_back(std::move(e));
            }
            ClusterOutcome out = cluster_rules(embs, eps, min_pts);
            // labels aligned with the input order, -1 = noise
            std::vector<int> labels(vectors.size(), -1);
            for (const auto& c : out.clusters)
                for (const auto& mem : c.members)
                    labels[static_cast<size_t>(std::stoul(mem))] = c.cluster_id;
            return labels;
        },
        py::arg("vectors"), py::arg("eps"), py::arg("min_pts"),
        "DBSCAN over cosine distance; returns per-point cluster labels (-1 = noise)");
}
