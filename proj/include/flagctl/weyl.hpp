#pragma once

#include <compare>
#include <initializer_list>
#include <string>
#include <vector>

namespace flagctl::weyl {

/// Element of the Weyl group of sl(n,R), realized as the symmetric group
/// S_n in one-line notation. Internally images are 0-based: image(i) is
/// where position i goes. The simple reflection s_i (i in 1..n-1) is the
/// transposition of i and i+1.
class WeylElement {
public:
    WeylElement() = default;

    static WeylElement identity(int n);
    static WeylElement simple_reflection(int n, int i); // i in 1..n-1
    /// Build from 1-based one-line notation, e.g. {2,1,3} for s_1 in S_3.
    static WeylElement from_one_line(const std::vector<int>& one_based);

    int n() const { return static_cast<int>(perm_.size()); }
    int image(int i) const { return perm_[i]; } // 0-based
    const std::vector<int>& perm() const { return perm_; }
    std::vector<int> one_line() const; // 1-based copy

    bool is_identity() const;
    int length() const; // inversion count = Coxeter length
    WeylElement inverse() const;

    bool operator==(const WeylElement&) const = default;
    auto operator<=>(const WeylElement&) const = default; // lexicographic

    std::string to_string() const; // "[2,1,3]"

private:
    explicit WeylElement(std::vector<int> perm) : perm_(std::move(perm)) {}
    std::vector<int> perm_; // 0-based images
};

/// Subset of simple-root indices; values are 1-based in {1..n-1} and kept
/// sorted. The simple root alpha_i is e_i - e_{i+1}.
class ThetaSet {
public:
    ThetaSet() = default;
    ThetaSet(std::initializer_list<int> indices);
    explicit ThetaSet(std::vector<int> indices);

    static ThetaSet full(int n); // Lambda = {1..n-1}

    const std::vector<int>& indices() const { return indices_; }
    bool contains(int i) const;
    bool empty() const { return indices_.empty(); }
    std::size_t size() const { return indices_.size(); }
    bool subset_of(const ThetaSet& other) const;
    bool operator==(const ThetaSet&) const = default;

    /// Throws if some index falls outside {1..n-1}.
    void validate(int n) const;

    std::string to_string() const; // "{1,3}"

private:
    std::vector<int> indices_;
};

/// w1 composed after w2: (w1*w2)(i) = w1(w2(i)).
WeylElement compose(const WeylElement& w1, const WeylElement& w2);

/// The order-reversing permutation [n, n-1, ..., 1]; the unique involution
/// mapping every positive root to a negative one.
WeylElement longest_element(int n);

/// All n! elements, sorted lexicographically (identity first).
std::vector<WeylElement> all_elements(int n);

/// W_Theta: closure of {s_i : i in theta} under composition (a Young
/// subgroup). Sorted.
std::vector<WeylElement> subgroup(int n, const ThetaSet& theta);

/// Partition of W into double cosets W_left * w * W_right. Blocks are
/// sorted internally and ordered by their lexicographically minimal
/// element, which also serves as the canonical representative.
std::vector<std::vector<WeylElement>> double_cosets(int n, const ThetaSet& left,
                                                    const ThetaSet& right);

/// Canonical representative (lex-min) of the block of w in
/// double_cosets(left, right).
WeylElement double_coset_representative(const WeylElement& w, const ThetaSet& left,
                                        const ThetaSet& right);

/// Representatives of the right-coset space W / W_theta, i.e.
/// double_cosets with trivial left subgroup.
std::vector<WeylElement> coset_representatives(int n, const ThetaSet& theta);

/// True iff w lies in rep * W_theta.
bool in_right_coset(const WeylElement& w, const WeylElement& rep, const ThetaSet& theta);

/// Minimal word [i_1,...,i_k] with s_{i_1} * ... * s_{i_k} = w (composition
/// left to right); found by breadth-first search on the Cayley graph.
/// Length equals the inversion count.
std::vector<int> reduced_word(const WeylElement& w);

/// Roots generated by the simple roots in theta, as ordered pairs (i,j)
/// meaning e_i - e_j with 0-based indices. In type A these are exactly the
/// pairs lying in a common block of the interval partition induced by
/// theta. Contains both signs.
std::vector<std::pair<int, int>> root_span(int n, const ThetaSet& theta);

/// Combinatorial hyperbolicity criterion for the label (w, theta) against
/// the flag type theta_phi: true iff every root generated by theta_phi is
/// the w-image of a root generated by theta.
bool is_hyperbolic_label(int n, const ThetaSet& theta_phi, const WeylElement& w,
                         const ThetaSet& theta);

/// Blocks of {0..n-1} glued by i ~ i+1 for i in theta (0-based block ids
/// per position, ids increasing along positions).
std::vector<int> theta_blocks(int n, const ThetaSet& theta);

} // namespace flagctl::weyl
