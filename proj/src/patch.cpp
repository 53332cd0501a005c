#include "rulehound/patch.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "rulehound/errors.hpp"
#include "rulehound/hash.hpp"
#include "rulehound/text.hpp"

namespace rulehound {

namespace {

std::string strip_diff_prefix(const std::string& p) {
    if (p == "/dev/null") return "";
    if (p.size() > 2 && (p[0] == 'a' || p[0] == 'b') && p[1] == '/') return p.substr(2);
    return p;
}

bool is_hex_id(const std::string& s) {
    if (s.size() < 7 || s.size() > 40) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    });
}

const std::regex kHunkHeader(R"(^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@ ?(.*)$)");

} // namespace

ParsedCommit parse_commit(const std::string& raw) {
    const auto lines = text::split_lines(raw);
    ParsedCommit commit;

    // locate the first diff header
    size_t diff_begin = lines.size();
    for (size_t i = 0; i < lines.size(); ++i) {
        const auto& l = lines[i];
        if (l.rfind("diff --git ", 0) == 0) {
            diff_begin = i;
            break;
        }
        if (l.rfind("--- ", 0) == 0 && i + 1 < lines.size() && lines[i + 1].rfind("+++ ", 0) == 0) {
            diff_begin = i;
            break;
        }
    }

    // --- preamble ---
    bool email_style = false;
    std::string subject;
    std::vector<std::string> body;
    bool in_headers = true;
    for (size_t i = 0; i < diff_begin; ++i) {
        const std::string& l = lines[i];
        if (in_headers) {
            if (l.rfind("commit ", 0) == 0) {
                auto id = text::trim(l.substr(7));
                auto sp = id.find(' ');
                if (sp != std::string::npos) id = id.substr(0, sp);
                if (is_hex_id(id)) commit.commit_id = id;
                continue;
            }
            if (l.rfind("From ", 0) == 0) {
                auto rest = l.substr(5);
                auto sp = rest.find(' ');
                auto id = sp == std::string::npos ? rest : rest.substr(0, sp);
                if (is_hex_id(id)) commit.commit_id = id;
                email_style = true;
                continue;
            }
            if (l.rfind("Author:", 0) == 0 || l.rfind("From:", 0) == 0) {
                commit.author = text::trim(l.substr(l.find(':') + 1));
                continue;
            }
            if (l.rfind("Date:", 0) == 0) {
                commit.date = text::trim(l.substr(5));
                continue;
            }
            if (l.rfind("Subject:", 0) == 0) {
                subject = text::trim(l.substr(8));
                // unfold continuation lines
                while (i + 1 < diff_begin && !lines[i + 1].empty() &&
                       (lines[i + 1][0] == ' ' || lines[i + 1][0] == '\t')) {
                    subject += " " + text::trim(lines[i + 1]);
                    ++i;
                }
                email_style = true;
                continue;
            }
            if (l.rfind("Merge:", 0) == 0) continue;
            if (text::trim(l).empty()) {
                in_headers = false;
                continue;
            }
            // not a recognized header: start of the message
            in_headers = false;
        }
        if (email_style && l == "---") break; // diffstat separator
        body.push_back(l);
    }

    // `git show` indents the message by four spaces
    for (auto& l : body) {
        if (l.rfind("    ", 0) == 0) l = l.substr(4);
    }
    while (!body.empty() && text::trim(body.front()).empty()) body.erase(body.begin());
    while (!body.empty() && text::trim(body.back()).empty()) body.pop_back();

    std::string message;
    if (!subject.empty()) {
        static const std::regex kPatchTag(R"(^\[PATCH[^\]]*\]\s*)");
        subject = std::regex_replace(subject, kPatchTag, "");
        message = subject;
        if (!body.empty()) message += "\n\n";
    }
    for (size_t i = 0; i < body.size(); ++i) {
        message += body[i];
        if (i + 1 < body.size()) message += "\n";
    }
    commit.message = message;

    // --- diff section ---
    FileDiff* current = nullptr;
    Hunk* hunk = nullptr;
    long seen_old = 0, seen_new = 0;
    auto finish_hunk = [&](size_t lineno) {
        if (hunk == nullptr) return;
        if (seen_old != hunk->old_count || seen_new != hunk->new_count)
            throw ParseError("hunk line counts do not match header at line " +
                             std::to_string(lineno));
        hunk = nullptr;
    };

    for (size_t i = diff_begin; i < lines.size(); ++i) {
        const std::string& l = lines[i];
        const size_t lineno = i + 1;
        if (l.rfind("diff --git ", 0) == 0) {
            finish_hunk(lineno);
            commit.diffs.emplace_back();
            current = &commit.diffs.back();
            continue;
        }
        if (l == "-- " || l == "--") {
            finish_hunk(lineno);
            break; // mail signature
        }
        if (current == nullptr && l.rfind("--- ", 0) == 0) {
            // headerless unified diff
            commit.diffs.emplace_back();
            current = &commit.diffs.back();
        }
        if (current == nullptr) continue;
        if (l.rfind("--- ", 0) == 0 && hunk == nullptr) {
            current->old_path = strip_diff_prefix(text::trim(l.substr(4)));
            current->added = current->old_path.empty();
            continue;
        }
        if (l.rfind("+++ ", 0) == 0 && hunk == nullptr) {
            current->new_path = strip_diff_prefix(text::trim(l.substr(4)));
            current->deleted = current->new_path.empty();
            continue;
        }
        if (l.rfind("Binary files", 0) == 0 || l.rfind("GIT binary patch", 0) == 0) {
            current->binary = true;
            continue;
        }
        if (l.rfind("@@", 0) == 0) {
            finish_hunk(lineno);
            std::smatch m;
            if (!std::regex_match(l, m, kHunkHeader))
                throw ParseError("malformed hunk header at line " + std::to_string(lineno) +
                                 ": " + l);
            current->hunks.emplace_back();
            hunk = &current->hunks.back();
            hunk->old_start = std::stol(m[1]);
            hunk->old_count = m[2].matched ? std::stol(m[2]) : 1;
            hunk->new_start = std::stol(m[3]);
            hunk->new_count = m[4].matched ? std::stol(m[4]) : 1;
            hunk->section = m[5];
            seen_old = seen_new = 0;
            continue;
        }
        if (hunk != nullptr) {
            if (!l.empty() && l[0] == '\\') {
                hunk->lines.push_back(l); // "\ No newline at end of file"
                continue;
            }
            if (!l.empty() && (l[0] == ' ' || l[0] == '+' || l[0] == '-')) {
                hunk->lines.push_back(l);
                if (l[0] != '+') ++seen_old;
                if (l[0] != '-') ++seen_new;
                continue;
            }
            if (l.empty()) {
                // some tools emit context blank lines with the prefix stripped
                hunk->lines.push_back(" ");
                ++seen_old;
                ++seen_new;
                continue;
            }
            finish_hunk(lineno);
        }
    }
    finish_hunk(lines.size());

    // drop binary-only or header-only entries that carry no hunks and no paths
    std::erase_if(commit.diffs, [](const FileDiff& d) {
        return !d.binary && d.hunks.empty() && d.old_path.empty() && d.new_path.empty();
    });

    bool has_content = false;
    for (const auto& d : commit.diffs)
        if (d.binary || !d.hunks.empty()) has_content = true;
    if (!has_content) throw ParseError("empty diff");

    if (commit.commit_id.empty())
        commit.commit_id = content_id(raw);
    return commit;
}

namespace {

const std::regex kTrailer(
    R"(^(Signed-off-by|Reviewed-by|Acked-by|Reported-by|Tested-by|Cc|Link|Fixes|Closes):)",
    std::regex::icase);
const std::regex kMailHeader(
    R"(^(From|Date|Subject|Author|Commit|AuthorDate|CommitDate|Message-Id|In-Reply-To|References|MIME-Version|Content-Type|Content-Transfer-Encoding):\s)",
    std::regex::icase);
const std::regex kUrl(R"(<?\bhttps?://[^\s>\)\]]+>?)");
const std::regex kDiffHeader(R"(^(diff --git |index [0-9a-f]+\.\.|@@ |\+\+\+ |--- ))");

} // namespace

std::string clean_metadata(const ParsedCommit& commit) {
    const auto lines = text::split_lines(commit.message);
    std::vector<std::string> kept;
    for (const auto& raw_line : lines) {
        const std::string t = text::trim(raw_line);
        if (std::regex_search(t, kTrailer)) continue;
        if (std::regex_search(t, kMailHeader)) continue;
        if (std::regex_search(t, kDiffHeader)) continue;
        std::string line = std::regex_replace(raw_line, kUrl, "");
        kept.push_back(text::trim(line).empty() ? "" : line);
    }

    // collapse blank runs, trim edges
    std::vector<std::string> collapsed;
    for (const auto& l : kept) {
        if (text::trim(l).empty()) {
            if (!collapsed.empty() && !collapsed.back().empty()) collapsed.push_back("");
        } else {
            collapsed.push_back(l);
        }
    }
    while (!collapsed.empty() && collapsed.back().empty()) collapsed.pop_back();

    std::string out;
    for (size_t i = 0; i < collapsed.size(); ++i) {
        out += collapsed[i];
        if (i + 1 < collapsed.size()) out += "\n";
    }
    if (text::trim(out).empty()) {
        // fall back to the title line
        for (const auto& l : lines)
            if (!text::trim(l).empty()) return text::trim(l);
        return "";
    }
    return out;
}

SeedPatch build_seed_patch(const ParsedCommit& commit, const SourceCorpus& pre_image) {
    SeedPatch seed;
    seed.commit_id = commit.commit_id;
    seed.description = clean_metadata(commit);
    seed.diffs = commit.diffs;

    std::vector<std::string> missing;
    // context key: (file, span start) -> index into seed.contexts
    std::map<std::pair<std::string, size_t>, size_t> by_span;

    for (const auto& diff : commit.diffs) {
        if (diff.binary || diff.added) continue;
        const SourceFile* file = pre_image.find_file(diff.pre_image_path());
        if (file == nullptr) {
            missing.push_back(diff.pre_image_path());
            continue;
        }
        for (const auto& hunk : diff.hunks) {
            // pre-image line numbers touched by this hunk: deleted lines, and
            // the anchor line for insertions
            std::set<long> edited;
            long old_line = hunk.old_start;
            for (const auto& hl : hunk.lines) {
                if (hl.empty()) continue;
                switch (hl[0]) {
                case ' ':
                    ++old_line;
                    break;
                case '-':
                    edited.insert(old_line);
                    ++old_line;
                    break;
                case '+': {
                    // anchor an insertion on the pre-image line it follows
                    long anchor = old_line > hunk.old_start ? old_line - 1 : old_line;
                    edited.insert(anchor < 1 ? 1 : anchor);
                    break;
                }
                default:
                    break;
                }
            }
            if (edited.empty()) edited.insert(hunk.old_start);

            // line -> byte offset; find the span enclosing the first edited line
            const FunctionSpan* span = nullptr;
            for (long line : edited) {
                if (line < 1 || static_cast<size_t>(line) > file->lines.size()) continue;
                size_t off = file->lines[static_cast<size_t>(line - 1)];
                span = pre_image.enclosing_function(*file, off);
                if (span != nullptr) break;
            }
            if (span == nullptr) {
                seed.contextless.push_back({diff.pre_image_path(), hunk.old_start});
                continue;
            }

            auto key = std::make_pair(file->path, span->start);
            auto it = by_span.find(key);
            if (it == by_span.end()) {
                SeedContext ctx;
                ctx.file = file->path;
                ctx.function = span->name;
                ctx.start = span->start;
                ctx.end = span->end;
                ctx.header = span->header;
                ctx.body = span->body;
                ctx.degraded = span->degraded;
                seed.contexts.push_back(std::move(ctx));
                it = by_span.emplace(key, seed.contexts.size() - 1).first;
            }
            SeedContext& ctx = seed.contexts[it->second];
            // mark edited lines relative to the context body
            size_t span_first_line = 0;
            for (size_t li = 0; li < file->lines.size(); ++li) {
                if (file->lines[li] <= span->start &&
                    (li + 1 == file->lines.size() || file->lines[li + 1] > span->start))
                    span_first_line = li;
            }
            const size_t body_line_count = text::split_lines(ctx.body).size();
            for (long line : edited) {
                if (line < 1) continue;
                size_t idx = static_cast<size_t>(line - 1);
                if (idx < span_first_line) continue;
                size_t rel = idx - span_first_line;
                if (rel >= body_line_count) continue;
                if (std::find(ctx.marked_lines.begin(), ctx.marked_lines.end(), rel) ==
                    ctx.marked_lines.end())
                    ctx.marked_lines.push_back(rel);
            }
            std::sort(ctx.marked_lines.begin(), ctx.marked_lines.end());
        }
    }

    if (!missing.empty()) {
        std::string msg = "files missing from pre-image:";
        for (const auto& p : missing) msg += " " + p;
        throw ParseError(msg);
    }
    return seed;
}

std::string render_file_diff(const FileDiff& diff) {
    std::string out;
    const std::string old_p = diff.old_path.empty() ? "/dev/null" : "a/" + diff.old_path;
    const std::string new_p = diff.new_path.empty() ? "/dev/null" : "b/" + diff.new_path;
    out += "--- " + old_p + "\n";
    out += "+++ " + new_p + "\n";
    for (const auto& h : diff.hunks) {
        out += "@@ -" + std::to_string(h.old_start) + "," + std::to_string(h.old_count) + " +" +
               std::to_string(h.new_start) + "," + std::to_string(h.new_count) + " @@";
        if (!h.section.empty()) out += " " + h.section;
        out += "\n";
        for (const auto& l : h.lines) out += l + "\n";
    }
    return out;
}

std::string render_seed_patch(const SeedPatch& seed) {
    std::string out = seed.description;
    out += "\n";
    for (const auto& diff : seed.diffs) {
        if (diff.binary) continue;
        out += "\n" + render_file_diff(diff);
    }
    for (const auto& ctx : seed.contexts) {
        out += "\n[Function " + ctx.function + " in " + ctx.file + "]\n";
        out += ctx.body;
        if (!ctx.body.empty() && ctx.body.back() != '\n') out += "\n";
        out += "[End Function]\n";
    }
    return out;
}

Json seed_to_json(const SeedPatch& seed) {
    Json j;
    j["commit"] = seed.commit_id;
    j["description"] = seed.description;
    Json diffs = Json::array();
    for (const auto& d : seed.diffs) {
        Json dj;
        dj["old_path"] = d.old_path;
        dj["new_path"] = d.new_path;
        dj["added"] = d.added;
        dj["deleted"] = d.deleted;
        dj["binary"] = d.binary;
        Json hunks = Json::array();
        for (const auto& h : d.hunks) {
            Json hj;
            hj["old_start"] = h.old_start;
            hj["old_count"] = h.old_count;
            hj["new_start"] = h.new_start;
            hj["new_count"] = h.new_count;
            hj["section"] = h.section;
            hj["lines"] = h.lines;
            hunks.push_back(std::move(hj));
        }
        dj["hunks"] = std::move(hunks);
        diffs.push_back(std::move(dj));
    }
    j["diffs"] = std::move(diffs);
    Json ctxs = Json::array();
    for (const auto& c : seed.contexts) {
        Json cj;
        cj["file"] = c.file;
        cj["function"] = c.function;
        cj["start"] = c.start;
        cj["end"] = c.end;
        cj["header"] = c.header;
        cj["body"] = c.body;
        cj["degraded"] = c.degraded;
        cj["marked_lines"] = c.marked_lines;
        ctxs.push_back(std::move(cj));
    }
    j["contexts"] = std::move(ctxs);
    Json loose = Json::array();
    for (const auto& c : seed.contextless) {
        Json cj;
        cj["path"] = c.path;
        cj["old_start"] = c.old_start;
        loose.push_back(std::move(cj));
    }
    j["contextless"] = std::move(loose);
    return j;
}

SeedPatch seed_from_json(const Json& j) {
    SeedPatch seed;
    seed.commit_id = j.at("commit").get<std::string>();
    seed.description = j.at("description").get<std::string>();
    for (const auto& dj : j.at("diffs")) {
        FileDiff d;
        d.old_path = dj.at("old_path").get<std::string>();
        d.new_path = dj.at("new_path").get<std::string>();
        d.added = dj.at("added").get<bool>();
        d.deleted = dj.at("deleted").get<bool>();
        d.binary = dj.at("binary").get<bool>();
        for (const auto& hj : dj.at("hunks")) {
            Hunk h;
            h.old_start = hj.at("old_start").get<long>();
            h.old_count = hj.at("old_count").get<long>();
            h.new_start = hj.at("new_start").get<long>();
            h.new_count = hj.at("new_count").get<long>();
            h.section = hj.at("section").get<std::string>();
            h.lines = hj.at("lines").get<std::vector<std::string>>();
            d.hunks.push_back(std::move(h));
        }
        seed.diffs.push_back(std::move(d));
    }
    for (const auto& cj : j.at("contexts")) {
        SeedContext c;
        c.file = cj.at("file").get<std::string>();
        c.function = cj.at("function").get<std::string>();
        c.start = cj.at("start").get<size_t>();
        c.end = cj.at("end").get<size_t>();
        c.header = cj.at("header").get<std::string>();
        c.body = cj.at("body").get<std::string>();
        c.degraded = cj.at("degraded").get<bool>();
        c.marked_lines = cj.at("marked_lines").get<std::vector<size_t>>();
        seed.contexts.push_back(std::move(c));
    }
    for (const auto& cj : j.at("contextless")) {
        seed.contextless.push_back(
            {cj.at("path").get<std::string>(), cj.at("old_start").get<long>()});
    }
    return seed;
}

} // namespace rulehound
