#pragma once

// Naive reference evaluator used as a test oracle. It shares no code with the
// library: label sets are bitmasks, rankings come from repeated selection,
// averages are exact rationals, and LCS is found by subsequence enumeration.

#include <bit>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace oracle {

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational& operator+=(const Rational& o) {
        num = num * o.den + o.num * den;
        den *= o.den;
        auto g = std::gcd(num, den);
        if (g > 1) num /= g, den /= g;
        return *this;
    }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline Rational ratio(std::int64_t a, std::int64_t b) {
    Rational r{a, b};
    auto g = std::gcd(a, b);
    if (g > 1) r.num /= g, r.den /= g;
    return r;
}

inline Rational average(const std::vector<Rational>& xs) {
    if (xs.empty()) return {0, 1};
    Rational sum;
    for (const auto& x : xs) sum += x;
    sum.den *= static_cast<std::int64_t>(xs.size());
    return ratio(sum.num, sum.den);
}

using Mask = std::uint32_t;

inline int popcount(Mask m) { return std::popcount(m); }

/// Labels sorted by score, highest first; equal scores keep the lower index first.
inline std::vector<int> selection_ranking(const std::vector<double>& scores) {
    std::vector<int> used(scores.size(), 0), order;
    for (std::size_t round = 0; round < scores.size(); ++round) {
        int best = -1;
        for (std::size_t l = 0; l < scores.size(); ++l) {
            if (used[l]) continue;
            if (best < 0 || scores[l] > scores[static_cast<std::size_t>(best)]) best = static_cast<int>(l);
        }
        used[static_cast<std::size_t>(best)] = 1;
        order.push_back(best);
    }
    return order;
}

inline Mask threshold_mask(const std::vector<double>& scores, double t) {
    Mask m = 0;
    for (std::size_t l = 0; l < scores.size(); ++l)
        if (scores[l] > t) m |= Mask{1} << l;
    return m;
}

struct AtNResult {
    double p, r, s;
};

inline AtNResult at_n(const std::vector<std::vector<double>>& scores, const std::vector<Mask>& truth, int n) {
    std::vector<Rational> ps, rs, ss;
    for (std::size_t d = 0; d < scores.size(); ++d) {
        auto order = selection_ranking(scores[d]);
        Mask top = 0;
        for (int i = 0; i < n && i < static_cast<int>(order.size()); ++i) top |= Mask{1} << order[static_cast<std::size_t>(i)];
        int h = popcount(top & truth[d]);
        if (truth[d] == 0) continue;
        ps.push_back(ratio(h, n));
        rs.push_back(ratio(h, popcount(truth[d])));
        ss.push_back(ratio(h > 0 ? 1 : 0, 1));
    }
    return {average(ps).value(), average(rs).value(), average(ss).value()};
}

struct PR {
    double p, r;
};

inline PR macro_pr(const std::vector<Mask>& pred, const std::vector<Mask>& truth) {
    std::vector<Rational> ps, rs;
    for (std::size_t d = 0; d < pred.size(); ++d) {
        int tp = popcount(pred[d] & truth[d]);
        int fp = popcount(pred[d] & ~truth[d]);
        int fn = popcount(truth[d] & ~pred[d]);
        ps.push_back(tp + fp == 0 ? ratio(1, 1) : ratio(tp, tp + fp));
        if (truth[d] != 0) rs.push_back(ratio(tp, tp + fn));
    }
    return {average(ps).value(), average(rs).value()};
}

inline double success(const std::vector<Mask>& pred, const std::vector<Mask>& truth) {
    std::vector<Rational> xs;
    for (std::size_t d = 0; d < pred.size(); ++d)
        if (truth[d] != 0) xs.push_back(ratio((pred[d] & truth[d]) != 0 ? 1 : 0, 1));
    return average(xs).value();
}

inline double exact_match(const std::vector<Mask>& pred, const std::vector<Mask>& truth) {
    std::vector<Rational> xs;
    for (std::size_t d = 0; d < pred.size(); ++d) xs.push_back(ratio(pred[d] == truth[d] ? 1 : 0, 1));
    return average(xs).value();
}

using Tokens = std::vector<std::string>;

/// Longest common subsequence by trying every subsequence of `a` (|a| <= 16).
inline std::size_t lcs_enumerate(const Tokens& a, const Tokens& b) {
    std::size_t best = 0;
    for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << a.size()); ++mask) {
        auto len = static_cast<std::size_t>(std::popcount(mask));
        if (len <= best) continue;
        std::size_t j = 0;
        bool ok = true;
        for (std::size_t i = 0; i < a.size() && ok; ++i) {
            if (!(mask >> i & 1)) continue;
            while (j < b.size() && b[j] != a[i]) ++j;
            if (j == b.size()) ok = false;
            else ++j;
        }
        if (ok) best = len;
    }
    return best;
}

/// Clipped overlap counted by scanning for each distinct gram.
inline PR rouge_n(const Tokens& cand, const Tokens& ref, std::size_t n) {
    auto grams = [n](const Tokens& t) {
        std::vector<Tokens> out;
        for (std::size_t i = 0; i + n <= t.size(); ++i) out.emplace_back(t.begin() + static_cast<long>(i), t.begin() + static_cast<long>(i + n));
        return out;
    };
    auto c = grams(cand), r = grams(ref);
    std::int64_t overlap = 0;
    std::vector<Tokens> distinct;
    for (const auto& g : c) {
        bool seen = false;
        for (const auto& x : distinct) seen = seen || x == g;
        if (seen) continue;
        distinct.push_back(g);
        std::int64_t in_c = 0, in_r = 0;
        for (const auto& x : c) in_c += x == g;
        for (const auto& x : r) in_r += x == g;
        overlap += std::min(in_c, in_r);
    }
    return {c.empty() ? 0.0 : ratio(overlap, static_cast<std::int64_t>(c.size())).value(),
            r.empty() ? 0.0 : ratio(overlap, static_cast<std::int64_t>(r.size())).value()};
}

}  // namespace oracle
