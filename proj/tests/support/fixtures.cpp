#include "fixtures.hpp"

#include <algorithm>
#include <cstdio>

#include "rulehound/errors.hpp"
#include "rulehound/patch.hpp"
#include "rulehound/rules.hpp"

namespace fixtures {

using namespace rulehound;

void write_fig2_corpus(const std::filesystem::path& root) {
    const auto dir = root / "drivers/infiniband/hw/nes";
    std::filesystem::create_directories(dir);
    write_text_file(dir / "nes_cm.c", kFig2PreImage);
}

namespace {

std::string caller_function(const std::string& name, const std::string& target, size_t variant) {
    std::string body;
    body += "static int " + name + "(struct device *dev)\n";
    body += "{\n";
    switch (variant % 3) {
    case 0:
        body += "\tstruct workqueue_struct *wq;\n";
        body += "\n";
        body += "\twq = " + target + "(\"" + name + "\");\n";
        body += "\tqueue_work(wq, &dev->work);\n";
        body += "\treturn 0;\n";
        break;
    case 1:
        body += "\tdev->wq = " + target + "(\"" + name + "\");\n";
        body += "\tif (!dev->priv)\n";
        body += "\t\treturn -EINVAL;\n";
        body += "\treturn 0;\n";
        break;
    default:
        body += "\tif (dev->flags)\n";
        body += "\t\tdev->wq = " + target + "(dev->name);\n";
        body += "\treturn dev->flags ? 0 : -ENODEV;\n";
        break;
    }
    body += "}\n";
    return body;
}

std::string plain_function(const std::string& name, size_t variant) {
    std::string body;
    body += "static void " + name + "(int value)\n";
    body += "{\n";
    if (variant % 2 == 0) {
        body += "\tif (value > 0) {\n";
        body += "\t\tpr_info(\"value %d\\n\", value);\n";
        body += "\t}\n";
    } else {
        body += "\tfor (int i = 0; i < value; i++)\n";
        body += "\t\tcpu_relax();\n";
    }
    body += "}\n";
    return body;
}

} // namespace

PlantedCorpus write_planted_corpus(const std::filesystem::path& root, const std::string& target,
                                   size_t total_files, size_t planted_callers,
                                   unsigned rng_seed) {
    std::filesystem::create_directories(root);
    std::mt19937 rng(rng_seed);

    PlantedCorpus out;
    out.planted_callers = planted_callers;

    size_t remaining = planted_callers;
    for (size_t fi = 0; fi < total_files; ++fi) {
        char name[32];
        std::snprintf(name, sizeof(name), "f%03zu.c", fi);
        std::string content = "#include <linux/kernel.h>\n\n";

        // spread callers roughly evenly over the remaining files
        size_t here = 0;
        if (remaining > 0) {
            const size_t files_left = total_files - fi;
            here = (remaining + files_left - 1) / files_left;
            here = std::min(here, remaining);
        }
        remaining -= here;

        for (size_t c = 0; c < here; ++c) {
            char fn[48];
            std::snprintf(fn, sizeof(fn), "probe_%03zu_%zu", fi, c);
            content += caller_function(fn, target, rng());
            content += "\n";
        }

        // decoys: the target inside a comment and a string, never in code
        if (fi % 3 == 0) {
            content += "/* " + target + " may fail; see docs */\n";
            content += "static const char *doc_" + std::to_string(fi) + " =\n\t\"call " +
                       target + " early\";\n\n";
            ++out.decoy_files;
        }
        // similarly named API: must never be reported for `target`
        if (fi % 4 == 0) {
            char fn[48];
            std::snprintf(fn, sizeof(fn), "enable_%03zu", fi);
            content += caller_function(fn, target + "_enable", rng());
            content += "\n";
        }
        content += plain_function("helper_" + std::to_string(fi), rng());
        write_text_file(root / name, content);
    }

    // one definition site of the target itself
    std::string def = "#include <linux/workqueue.h>\n\n";
    def += "struct workqueue_struct *" + target + "(const char *name)\n";
    def += "{\n";
    def += "\treturn __alloc_workqueue(name, WQ_UNBOUND, 1);\n";
    def += "}\n";
    write_text_file(root / "zz_defs.c", def);

    return out;
}

std::vector<GroundTruthPattern> make_dataset(size_t patterns, size_t patches,
                                             unsigned rng_seed) {
    if (patches <= patterns) throw ConfigError("dataset needs more patches than patterns");
    std::mt19937 rng(rng_seed);

    const size_t total_pairs = patches - patterns;
    std::vector<size_t> per_pattern(patterns, 1);
    for (size_t extra = total_pairs - patterns; extra > 0; --extra)
        per_pattern[rng() % patterns] += 1;

    static const char* kApis[] = {"kmalloc", "clk_prepare", "ioremap", "of_node_get",
                                  "request_irq", "usb_alloc_urb", "ida_alloc", "kstrdup"};

    std::vector<GroundTruthPattern> dataset;
    for (size_t p = 0; p < patterns; ++p) {
        GroundTruthPattern pat;
        pat.pattern_id = "pattern-" + std::to_string(p);
        const std::string api = kApis[p % (sizeof(kApis) / sizeof(kApis[0]))];
        pat.rule_target = api;
        pat.rule_text = render_rule(1, {{"TARGET", api},
                                        {"ERR_RETURN_VALUE", "NULL"},
                                        {"IMPACT", "a NULL pointer dereference"}});
        pat.seed_commit = "seed-" + std::to_string(p);
        pat.seed_patch_text =
            "fix " + api + " misuse\n\n--- a/x.c\n+++ b/x.c\n@@ -1,1 +1,2 @@\n " + api +
            "(size);\n+check();\n";
        for (size_t i = 0; i < per_pattern[p]; ++i) {
            EvalPair pair;
            pair.pair_id = "p" + std::to_string(p) + "-" + std::to_string(i);
            const std::string tag = std::to_string(p) + "_" + std::to_string(i);
            pair.positive = "static int use_" + tag + "(void)\n{\n\tvoid *b = " + api +
                            "(64);\n\tconsume(b);\n\treturn 0;\n}\n";
            pair.negative = "static int use_" + tag + "(void)\n{\n\tvoid *b = " + api +
                            "(64);\n\tif (!b)\n\t\treturn -ENOMEM;\n\tconsume(b);\n\treturn "
                            "0;\n}\n";
            pat.pairs.push_back(std::move(pair));
        }
        dataset.push_back(std::move(pat));
    }
    return dataset;
}

void write_dataset(const std::filesystem::path& path,
                   const std::vector<GroundTruthPattern>& dataset) {
    std::vector<Json> records;
    for (const auto& p : dataset) {
        Json j;
        j["pattern_id"] = p.pattern_id;
        Json rule;
        rule["text"] = p.rule_text;
        rule["target"] = p.rule_target;
        rule["match_mode"] = to_string(p.rule_match_mode);
        j["rule"] = std::move(rule);
        j["seed_commit"] = p.seed_commit;
        if (!p.seed_patch_text.empty()) j["seed_patch"] = p.seed_patch_text;
        Json pairs = Json::array();
        for (const auto& pair : p.pairs) {
            Json pj;
            pj["pair_id"] = pair.pair_id;
            pj["positive"] = pair.positive;
            pj["negative"] = pair.negative;
            pairs.push_back(std::move(pj));
        }
        j["pairs"] = std::move(pairs);
        records.push_back(std::move(j));
    }
    jsonl::write_file(path, records);
}

GoldenInputs make_golden_inputs() {
    GoldenInputs g;
    const auto tmp =
        std::filesystem::temp_directory_path() / "rulehound-golden-fixture";
    std::filesystem::remove_all(tmp);
    write_fig2_corpus(tmp);
    SourceCorpus corpus = load_corpus(tmp);
    ParsedCommit commit = parse_commit(kFig2Commit);
    g.seed = build_seed_patch(commit, corpus);
    g.patch_text = render_seed_patch(g.seed);
    g.rule_text = render_rule(1, {{"TARGET", "create_singlethread_workqueue"},
                                  {"ERR_RETURN_VALUE", "NULL"},
                                  {"IMPACT", "a NULL pointer dereference"}});
    const SourceFile* file = corpus.find_file("drivers/infiniband/hw/nes/nes_cm.c");
    g.candidate_body = file->functions.front().body;
    std::filesystem::remove_all(tmp);
    return g;
}

} // namespace fixtures
