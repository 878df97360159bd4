#include "flagctl/weyl.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include "flagctl/errors.hpp"

namespace flagctl::weyl {

WeylElement WeylElement::identity(int n) {
    require(n >= 1, Error::Code::domain, "WeylElement: n must be positive");
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    return WeylElement(std::move(p));
}

WeylElement WeylElement::simple_reflection(int n, int i) {
    require(i >= 1 && i <= n - 1, Error::Code::domain,
            "simple_reflection: index " + std::to_string(i) + " outside 1.." +
                std::to_string(n - 1));
    WeylElement w = identity(n);
    std::swap(w.perm_[i - 1], w.perm_[i]);
    return w;
}

WeylElement WeylElement::from_one_line(const std::vector<int>& one_based) {
    const int n = static_cast<int>(one_based.size());
    require(n >= 1, Error::Code::domain, "from_one_line: empty permutation");
    std::vector<int> p(n);
    std::vector<bool> seen(n, false);
    for (int i = 0; i < n; ++i) {
        const int v = one_based[i];
        require(v >= 1 && v <= n, Error::Code::domain,
                "from_one_line: entry " + std::to_string(v) + " outside 1.." +
                    std::to_string(n));
        require(!seen[v - 1], Error::Code::domain,
                "from_one_line: repeated entry " + std::to_string(v));
        seen[v - 1] = true;
        p[i] = v - 1;
    }
    return WeylElement(std::move(p));
}

std::vector<int> WeylElement::one_line() const {
    std::vector<int> out(perm_.size());
    for (std::size_t i = 0; i < perm_.size(); ++i) out[i] = perm_[i] + 1;
    return out;
}

bool WeylElement::is_identity() const {
    for (int i = 0; i < n(); ++i)
        if (perm_[i] != i) return false;
    return true;
}

int WeylElement::length() const {
    int inv = 0;
    for (int i = 0; i < n(); ++i)
        for (int j = i + 1; j < n(); ++j)
            if (perm_[i] > perm_[j]) ++inv;
    return inv;
}

WeylElement WeylElement::inverse() const {
    std::vector<int> p(perm_.size());
    for (int i = 0; i < n(); ++i) p[perm_[i]] = i;
    return WeylElement(std::move(p));
}

std::string WeylElement::to_string() const {
    std::ostringstream os;
    os << '[';
    for (int i = 0; i < n(); ++i) {
        if (i) os << ',';
        os << perm_[i] + 1;
    }
    os << ']';
    return os.str();
}

ThetaSet::ThetaSet(std::initializer_list<int> indices)
    : ThetaSet(std::vector<int>(indices)) {}

ThetaSet::ThetaSet(std::vector<int> indices) : indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
    for (int i : indices_)
        require(i >= 1, Error::Code::domain, "ThetaSet: indices are 1-based");
}

ThetaSet ThetaSet::full(int n) {
    std::vector<int> v(n - 1);
    std::iota(v.begin(), v.end(), 1);
    return ThetaSet(std::move(v));
}

bool ThetaSet::contains(int i) const {
    return std::binary_search(indices_.begin(), indices_.end(), i);
}

bool ThetaSet::subset_of(const ThetaSet& other) const {
    return std::includes(other.indices_.begin(), other.indices_.end(),
                         indices_.begin(), indices_.end());
}

void ThetaSet::validate(int n) const {
    for (int i : indices_)
        require(i >= 1 && i <= n - 1, Error::Code::domain,
                "ThetaSet: index " + std::to_string(i) + " outside 1.." +
                    std::to_string(n - 1));
}

std::string ThetaSet::to_string() const {
    std::ostringstream os;
    os << '{';
    for (std::size_t k = 0; k < indices_.size(); ++k) {
        if (k) os << ',';
        os << indices_[k];
    }
    os << '}';
    return os.str();
}

WeylElement compose(const WeylElement& w1, const WeylElement& w2) {
    require(w1.n() == w2.n(), Error::Code::dimension,
            "compose: mismatched permutation sizes " + std::to_string(w1.n()) +
                " vs " + std::to_string(w2.n()));
    std::vector<int> p(w1.n());
    for (int i = 0; i < w1.n(); ++i) p[i] = w1.image(w2.image(i)) + 1;
    return WeylElement::from_one_line(p);
}

WeylElement longest_element(int n) {
    require(n >= 2, Error::Code::domain, "longest_element: n must be >= 2");
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = n - i;
    return WeylElement::from_one_line(p);
}

std::vector<WeylElement> all_elements(int n) {
    std::vector<int> line(n);
    std::iota(line.begin(), line.end(), 1);
    std::vector<WeylElement> out;
    do {
        out.push_back(WeylElement::from_one_line(line));
    } while (std::next_permutation(line.begin(), line.end()));
    return out; // next_permutation enumerates in lexicographic order
}

std::vector<WeylElement> subgroup(int n, const ThetaSet& theta) {
    theta.validate(n);
    std::vector<WeylElement> gens;
    for (int i : theta.indices()) gens.push_back(WeylElement::simple_reflection(n, i));

    std::set<WeylElement> closure;
    std::queue<WeylElement> todo;
    closure.insert(WeylElement::identity(n));
    todo.push(WeylElement::identity(n));
    while (!todo.empty()) {
        const WeylElement w = todo.front();
        todo.pop();
        for (const auto& s : gens) {
            const WeylElement ws = compose(w, s);
            if (closure.insert(ws).second) todo.push(ws);
        }
    }
    return {closure.begin(), closure.end()};
}

std::vector<std::vector<WeylElement>> double_cosets(int n, const ThetaSet& left,
                                                    const ThetaSet& right) {
    left.validate(n);
    right.validate(n);
    const auto wl = subgroup(n, left);
    const auto wr = subgroup(n, right);
    const auto all = all_elements(n);

    std::set<WeylElement> assigned;
    std::vector<std::vector<WeylElement>> blocks;
    for (const auto& w : all) { // lex order, so block reps come out lex-minimal
        if (assigned.count(w)) continue;
        std::set<WeylElement> block;
        for (const auto& l : wl)
            for (const auto& r : wr) block.insert(compose(l, compose(w, r)));
        blocks.emplace_back(block.begin(), block.end());
        assigned.insert(block.begin(), block.end());
    }
    return blocks;
}

WeylElement double_coset_representative(const WeylElement& w, const ThetaSet& left,
                                        const ThetaSet& right) {
    const int n = w.n();
    const auto wl = subgroup(n, left);
    const auto wr = subgroup(n, right);
    WeylElement best = w;
    for (const auto& l : wl)
        for (const auto& r : wr) {
            const WeylElement cand = compose(l, compose(w, r));
            if (cand < best) best = cand;
        }
    return best;
}

std::vector<WeylElement> coset_representatives(int n, const ThetaSet& theta) {
    std::vector<WeylElement> reps;
    for (const auto& block : double_cosets(n, ThetaSet{}, theta))
        reps.push_back(block.front());
    return reps;
}

bool in_right_coset(const WeylElement& w, const WeylElement& rep, const ThetaSet& theta) {
    require(w.n() == rep.n(), Error::Code::dimension, "in_right_coset: size mismatch");
    const WeylElement q = compose(rep.inverse(), w);
    const auto wt = subgroup(w.n(), theta);
    return std::binary_search(wt.begin(), wt.end(), q);
}

std::vector<int> reduced_word(const WeylElement& w) {
    const int n = w.n();
    if (w.is_identity()) return {};

    // BFS from the identity, multiplying generators on the right; reaching w
    // along a shortest path gives a reduced word read left to right.
    std::map<WeylElement, std::pair<WeylElement, int>> parent; // child -> (parent, gen)
    std::queue<WeylElement> frontier;
    const WeylElement e = WeylElement::identity(n);
    parent.emplace(e, std::make_pair(e, 0));
    frontier.push(e);
    while (!frontier.empty()) {
        const WeylElement v = frontier.front();
        frontier.pop();
        for (int i = 1; i <= n - 1; ++i) {
            const WeylElement vs = compose(v, WeylElement::simple_reflection(n, i));
            if (parent.emplace(vs, std::make_pair(v, i)).second) {
                if (vs == w) {
                    std::vector<int> word;
                    WeylElement cur = w;
                    while (!(cur == e)) {
                        const auto& [p, gen] = parent.at(cur);
                        word.push_back(gen);
                        cur = p;
                    }
                    std::reverse(word.begin(), word.end());
                    return word;
                }
                frontier.push(vs);
            }
        }
    }
    fail(Error::Code::domain, "reduced_word: unreachable element"); // cannot happen
}

std::vector<int> theta_blocks(int n, const ThetaSet& theta) {
    std::vector<int> block(n, 0);
    int id = 0;
    for (int pos = 1; pos < n; ++pos) {
        if (!theta.contains(pos)) ++id; // alpha_pos absent: cut between pos-1 and pos
        block[pos] = id;
    }
    return block;
}

std::vector<std::pair<int, int>> root_span(int n, const ThetaSet& theta) {
    const auto block = theta_blocks(n, theta);
    std::vector<std::pair<int, int>> roots;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && block[i] == block[j]) roots.emplace_back(i, j);
    return roots;
}

bool is_hyperbolic_label(int n, const ThetaSet& theta_phi, const WeylElement& w,
                         const ThetaSet& theta) {
    theta_phi.validate(n);
    theta.validate(n);
    require(w.n() == n, Error::Code::dimension, "is_hyperbolic_label: size mismatch");

    const auto span_phi = root_span(n, theta_phi);
    const auto span_theta = root_span(n, theta);
    std::set<std::pair<int, int>> image;
    for (const auto& [i, j] : span_theta) image.emplace(w.image(i), w.image(j));
    for (const auto& r : span_phi)
        if (!image.count(r)) return false;
    return true;
}

} // namespace flagctl::weyl
