#include "oracles.hpp"

#include <functional>
#include <regex>
#include <stdexcept>

namespace oracles {

std::string strip_reference(const std::string& src) {
    std::string out = src;
    size_t i = 0;
    const size_t n = src.size();
    auto blank = [&](size_t from, size_t to) {
        for (size_t k = from; k < to && k < n; ++k)
            if (out[k] != '\n') out[k] = ' ';
    };
    while (i < n) {
        if (src[i] == '/' && i + 1 < n && src[i + 1] == '/') {
            size_t j = i;
            while (j < n) {
                if (src[j] == '\n') {
                    size_t b = j;
                    while (b > i && src[b - 1] == '\r') --b;
                    if (b > i && src[b - 1] == '\\') {
                        ++j;
                        continue;
                    }
                    break;
                }
                ++j;
            }
            blank(i, j);
            i = j;
        } else if (src[i] == '/' && i + 1 < n && src[i + 1] == '*') {
            size_t j = i + 2;
            while (j + 1 < n && !(src[j] == '*' && src[j + 1] == '/')) ++j;
            const size_t stop = j + 1 < n ? j + 2 : n;
            blank(i, stop);
            i = stop;
        } else if (src[i] == '"' || src[i] == '\'') {
            const char delim = src[i];
            size_t j = i + 1;
            while (j < n && src[j] != delim && src[j] != '\n') {
                if (src[j] == '\\' && j + 1 < n) ++j;
                ++j;
            }
            const size_t stop = j < n && src[j] == delim ? j + 1 : j;
            blank(i, stop);
            i = stop;
        } else {
            ++i;
        }
    }
    return out;
}

namespace {

// preprocessor line spans (start, end) in stripped text
std::vector<std::pair<size_t, size_t>> pp_spans(const std::string& s) {
    std::vector<std::pair<size_t, size_t>> spans;
    size_t i = 0;
    while (i < s.size()) {
        size_t ls = i;
        size_t j = i;
        while (j < s.size() && (s[j] == ' ' || s[j] == '\t')) ++j;
        bool pp = j < s.size() && s[j] == '#';
        size_t k = ls;
        while (k < s.size()) {
            if (s[k] == '\n') {
                if (pp && k > ls && s[k - 1] == '\\') {
                    ++k;
                    continue;
                }
                break;
            }
            ++k;
        }
        if (pp) spans.emplace_back(ls, k);
        i = k < s.size() ? k + 1 : s.size();
    }
    return spans;
}

bool in_spans(const std::vector<std::pair<size_t, size_t>>& spans, size_t pos) {
    for (const auto& [b, e] : spans)
        if (pos >= b && pos < e) return true;
    return false;
}

} // namespace

bool brace_balanced(const std::string& stripped, size_t begin, size_t end) {
    const auto pp = pp_spans(stripped);
    // recursive matcher: match() consumes one balanced group
    std::function<bool(size_t&, bool)> match = [&](size_t& pos, bool top) -> bool {
        while (pos < end) {
            const char c = stripped[pos];
            if (in_spans(pp, pos)) {
                ++pos;
                continue;
            }
            if (c == '{') {
                ++pos;
                if (!match(pos, false)) return false;
            } else if (c == '}') {
                if (top) return false; // unmatched closer
                ++pos;
                return true;
            } else {
                ++pos;
            }
        }
        return top; // inner group that ran off the end is unbalanced
    };
    size_t pos = begin;
    return match(pos, true);
}

std::vector<size_t> find_target_occurrences(const std::string& stripped,
                                            const std::string& target, bool call_mode) {
    const std::string pattern =
        call_mode ? "\\b" + target + "\\s*\\(" : "\\b" + target + "\\b";
    std::regex re(pattern);
    std::vector<size_t> out;
    auto begin = std::sregex_iterator(stripped.begin(), stripped.end(), re);
    for (auto it = begin; it != std::sregex_iterator(); ++it)
        out.push_back(static_cast<size_t>(it->position()));
    return out;
}

RefMetrics reference_metrics(long tp, long fp, long fn, long pairs_correct, long pairs_total) {
    RefMetrics m;
    if (tp + fp > 0) m.precision = static_cast<long double>(tp) / (tp + fp);
    if (tp + fn > 0) m.recall = static_cast<long double>(tp) / (tp + fn);
    if (pairs_total > 0)
        m.pairwise_accuracy = static_cast<long double>(pairs_correct) / pairs_total;
    return m;
}

std::vector<int> reference_dbscan(const std::vector<std::vector<double>>& dist, double eps,
                                  size_t min_pts) {
    const size_t n = dist.size();
    std::vector<int> label(n, -2);
    auto neighborhood = [&](size_t p) {
        std::vector<size_t> nb;
        for (size_t q = 0; q < n; ++q)
            if (dist[p][q] <= eps) nb.push_back(q);
        return nb;
    };

    int cluster = 0;
    std::function<void(size_t, int)> expand = [&](size_t p, int cid) {
        auto nb = neighborhood(p);
        if (nb.size() < min_pts) return; // not core: stop expanding from here
        for (size_t q : nb) {
            if (label[q] == -1) label[q] = cid;
            if (label[q] != -2) continue;
            label[q] = cid;
            expand(q, cid);
        }
    };

    for (size_t p = 0; p < n; ++p) {
        if (label[p] != -2) continue;
        if (neighborhood(p).size() < min_pts) {
            label[p] = -1;
            continue;
        }
        label[p] = cluster;
        expand(p, cluster);
        ++cluster;
    }
    return label;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    std::map<int, int> fwd, rev;
    for (size_t i = 0; i < a.size(); ++i) {
        if ((a[i] == -1) != (b[i] == -1)) return false;
        if (a[i] == -1) continue;
        auto f = fwd.find(a[i]);
        if (f == fwd.end()) fwd[a[i]] = b[i];
        else if (f->second != b[i]) return false;
        auto r = rev.find(b[i]);
        if (r == rev.end()) rev[b[i]] = a[i];
        else if (r->second != a[i]) return false;
    }
    return true;
}

size_t reference_medoid(const std::vector<std::vector<double>>& dist,
                        const std::vector<size_t>& members) {
    size_t best = members.front();
    double best_total = -1.0;
    for (size_t m : members) {
        double total = 0.0;
        for (size_t other : members)
            if (other != m) total += dist[m][other];
        if (best_total < 0 || total < best_total) {
            best_total = total;
            best = m;
        }
    }
    return best;
}

long reference_token_count(const std::string& text) {
    long count = 0;
    size_t i = 0;
    const size_t n = text.size();
    auto is_word = [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '_';
    };
    while (i < n) {
        const char c = text[i];
        if (is_word(c)) {
            size_t j = i;
            while (j < n && is_word(text[j])) ++j;
            const size_t len = j - i;
            count += static_cast<long>((len + 7) / 8); // long words split into chunks
            i = j;
        } else if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
        } else {
            ++count; // punctuation and newlines, one token each
            ++i;
        }
    }
    return count;
}

std::string apply_hunks(const std::string& pre_image, const std::vector<RefHunk>& hunks) {
    std::vector<std::string> lines;
    size_t start = 0;
    for (size_t i = 0; i <= pre_image.size(); ++i) {
        if (i == pre_image.size() || pre_image[i] == '\n') {
            lines.emplace_back(pre_image.substr(start, i - start));
            start = i + 1;
        }
    }
    if (!pre_image.empty() && pre_image.back() == '\n') lines.pop_back();

    std::vector<std::string> out;
    size_t cursor = 0; // 0-based index into lines
    for (const auto& h : hunks) {
        const size_t hunk_begin = static_cast<size_t>(h.old_start > 0 ? h.old_start - 1 : 0);
        while (cursor < hunk_begin && cursor < lines.size()) out.push_back(lines[cursor++]);
        for (const auto& hl : h.lines) {
            if (hl.empty()) continue;
            const char tag = hl[0];
            const std::string content = hl.substr(1);
            if (tag == ' ') {
                if (cursor >= lines.size() || lines[cursor] != content)
                    throw std::runtime_error("context mismatch applying hunk");
                out.push_back(lines[cursor++]);
            } else if (tag == '-') {
                if (cursor >= lines.size() || lines[cursor] != content)
                    throw std::runtime_error("delete mismatch applying hunk");
                ++cursor;
            } else if (tag == '+') {
                out.push_back(content);
            }
        }
    }
    while (cursor < lines.size()) out.push_back(lines[cursor++]);

    std::string result;
    for (const auto& l : out) result += l + "\n";
    return result;
}

} // namespace oracles
