#pragma once

// Shared fixture builders for the unit and acceptance suites.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "rulehound/eval.hpp"
#include "rulehound/jsonl.hpp"

namespace fixtures {

inline const char* kFig2PreImage =
    "/* fixture: single-thread workqueue consumer */\n"
    "#include \"nes.h\"\n"
    "\n"
    "struct nes_cm_core *nes_cm_alloc_core(void)\n"
    "{\n"
    "\tstruct nes_cm_core *cm_core;\n"
    "\n"
    "\tcm_core = kzalloc(sizeof(*cm_core), GFP_KERNEL);\n"
    "\tif (!cm_core)\n"
    "\t\treturn NULL;\n"
    "\n"
    "\tcm_core->event_wq = create_singlethread_workqueue(\"nesewq\");\n"
    "\n"
    "\treturn cm_core;\n"
    "}\n"
    "\n"
    "int nes_cm_start(struct nes_cm_core *cm_core)\n"
    "{\n"
    "\treturn cm_core ? 0 : -EINVAL;\n"
    "}\n";

inline const char* kFig2Commit =
    "commit a82268b30a8b\n"
    "Author: A Developer <dev@example.com>\n"
    "Date:   Wed Feb 17 14:21:00 2016 -0600\n"
    "\n"
    "    RDMA/nes: add check on the returned workqueue pointer\n"
    "    \n"
    "    create_singlethread_workqueue can fail and return NULL. Check the\n"
    "    returned pointer before use to avoid a NULL dereference.\n"
    "    \n"
    "    Link: https://lore.example.org/r/12345\n"
    "    Signed-off-by: A Developer <dev@example.com>\n"
    "\n"
    "diff --git a/drivers/infiniband/hw/nes/nes_cm.c b/drivers/infiniband/hw/nes/nes_cm.c\n"
    "index 1111111..2222222 100644\n"
    "--- a/drivers/infiniband/hw/nes/nes_cm.c\n"
    "+++ b/drivers/infiniband/hw/nes/nes_cm.c\n"
    "@@ -12,3 +12,5 @@ struct nes_cm_core *nes_cm_alloc_core(void)\n"
    " \tcm_core->event_wq = create_singlethread_workqueue(\"nesewq\");\n"
    "+\tif (!cm_core->event_wq)\n"
    "+\t\treturn NULL;\n"
    " \n"
    " \treturn cm_core;\n";

/// Writes the Fig-2-style pre-image tree under `root`.
void write_fig2_corpus(const std::filesystem::path& root);

/// A crafted corpus: `total_files` files, exactly `planted_callers` functions
/// calling `target`, plus comment/string decoys, one definition of the target
/// itself, and similarly named callers (target + "_enable").
struct PlantedCorpus {
    size_t planted_callers = 0;
    size_t decoy_files = 0;
};
PlantedCorpus write_planted_corpus(const std::filesystem::path& root, const std::string& target,
                                   size_t total_files, size_t planted_callers,
                                   unsigned rng_seed);

/// Synthetic ground-truth dataset: `patterns` patterns whose pair counts sum
/// to `patches - patterns`. Snippets are small distinct C functions.
std::vector<rulehound::GroundTruthPattern> make_dataset(size_t patterns, size_t patches,
                                                        unsigned rng_seed);

void write_dataset(const std::filesystem::path& path,
                   const std::vector<rulehound::GroundTruthPattern>& dataset);

/// Inputs every golden prompt derives from.
struct GoldenInputs {
    std::string candidate_body;
    std::string rule_text;
    std::string patch_text;    // rendered seed patch
    rulehound::SeedPatch seed; // the Fig-2 seed
};
GoldenInputs make_golden_inputs();

} // namespace fixtures
