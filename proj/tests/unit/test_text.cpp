#include <doctest.h>

#include <random>

#include "rulehound/text.hpp"

#include "../support/oracles.hpp"

using namespace rulehound;

TEST_CASE("stripping blanks comments and literals but keeps layout") {
    const std::string src =
        "int a; // kmalloc here\n"
        "/* kmalloc\n   again */ int b = 'k';\n"
        "const char *s = \"kmalloc(x)\";\n"
        "void *p = kmalloc(8);\n";
    const std::string stripped = text::strip_comments_and_strings(src);
    CHECK(stripped.size() == src.size());
    // newlines survive
    for (size_t i = 0; i < src.size(); ++i)
        if (src[i] == '\n') CHECK(stripped[i] == '\n');
    // only the real call survives
    CHECK(text::contains_identifier(stripped, "kmalloc"));
    CHECK(stripped.find("kmalloc") == stripped.rfind("kmalloc"));
}

TEST_CASE("stray quote cannot poison the rest of the file") {
    const std::string src =
        "int width = x; ' \n"
        "void *p = kmalloc(8);\n";
    const std::string stripped = text::strip_comments_and_strings(src);
    CHECK(text::contains_identifier(stripped, "kmalloc"));
}

TEST_CASE("escapes inside literals") {
    const std::string src = "const char *s = \"a\\\"b kfree \"; int kfree_use = kfree(p);\n";
    const std::string stripped = text::strip_comments_and_strings(src);
    const auto occurrences = oracles::find_target_occurrences(stripped, "kfree", true);
    CHECK(occurrences.size() == 1);
}

TEST_CASE("stripping agrees with the reference on random-ish C") {
    std::mt19937 rng(42);
    const std::vector<std::string> pieces = {
        "int x = 1;\n",     "// trailing comment\n", "/* block */\n",
        "char c = 'x';\n",  "char *s = \"str\";\n",  "if (a /* inline */ > 2) { b(); }\n",
        "s = \"a\\\\\";\n", "y = a / b;\n",          "/* multi\nline\ncomment */\n",
    };
    for (int round = 0; round < 200; ++round) {
        std::string src;
        const size_t n = 1 + rng() % 8;
        for (size_t i = 0; i < n; ++i) src += pieces[rng() % pieces.size()];
        CAPTURE(src);
        CHECK(text::strip_comments_and_strings(src) == oracles::strip_reference(src));
    }
}

TEST_CASE("preprocessor blanking covers continuations") {
    const std::string src =
        "#define LOCK() { \\\n  spin_lock(); }\n"
        "int f(void) { return 0; }\n";
    const std::string scan =
        text::blank_preprocessor_lines(text::strip_comments_and_strings(src));
    CHECK(scan.find("LOCK") == std::string::npos);
    CHECK(scan.find("spin_lock") == std::string::npos);
    CHECK(scan.find("int f") != std::string::npos);
}

TEST_CASE("identifier helpers") {
    CHECK(text::is_c_identifier("clk_prepare"));
    CHECK(!text::is_c_identifier("2fast"));
    CHECK(!text::is_c_identifier("foo bar"));
    CHECK(text::contains_identifier("call clk_prepare now", "clk_prepare"));
    // a longer identifier must not count as a mention of the shorter one
    CHECK(!text::contains_identifier("clk_prepare_enable(x)", "clk_prepare"));
}
