#pragma once

#include <array>
#include <cstdint>

// Canonical storage for index blocks that are symmetric in a pair or a triple
// of spacetime indices.  Dimension is fixed at 4; indices run 0..3 internally
// and are printed 1..4 at the reporting layer.

namespace dedonder {

inline constexpr int DIM = 4;
inline constexpr int NPAIR = 10;   // unordered pairs (mu,nu)
inline constexpr int NTRI = 20;    // unordered triples (a,b,c)
inline constexpr int NZ1 = NPAIR * DIM;    // 40
inline constexpr int NZ2 = NPAIR * NPAIR;  // 100
inline constexpr int NZ3 = NPAIR * NTRI;   // 200

// Upper-triangle row-major rank of an unordered pair.
constexpr int pair_index(int mu, int nu) {
    const int i = mu <= nu ? mu : nu;
    const int j = mu <= nu ? nu : mu;
    return i * DIM - i * (i - 1) / 2 + (j - i);
}

// Number of distinct ordered tuples in the pair's orbit (1 on the diagonal, 2 off).
constexpr int pair_mult(int mu, int nu) { return mu == nu ? 1 : 2; }

struct PairTable {
    std::array<std::array<int, 2>, NPAIR> unpack{};
    std::array<int, NPAIR> mult{};
    constexpr PairTable() {
        for (int i = 0; i < DIM; ++i)
            for (int j = i; j < DIM; ++j) {
                const int p = pair_index(i, j);
                unpack[p] = {i, j};
                mult[p] = pair_mult(i, j);
            }
    }
};
inline constexpr PairTable kPairs{};

struct TripleTable {
    std::array<std::array<int, 3>, NTRI> unpack{};
    std::array<int, NTRI> mult{};            // distinct permutations: 1, 3, or 6
    std::array<int, DIM * DIM * DIM> rank{}; // any ordering -> triple rank
    constexpr TripleTable() {
        int n = 0;
        for (int a = 0; a < DIM; ++a)
            for (int b = a; b < DIM; ++b)
                for (int c = b; c < DIM; ++c) {
                    unpack[n] = {a, b, c};
                    mult[n] = (a == b && b == c) ? 1 : (a == b || b == c || a == c) ? 3 : 6;
                    ++n;
                }
        for (int a = 0; a < DIM; ++a)
            for (int b = 0; b < DIM; ++b)
                for (int c = 0; c < DIM; ++c) {
                    int s[3] = {a, b, c};
                    if (s[0] > s[1]) { const int t = s[0]; s[0] = s[1]; s[1] = t; }
                    if (s[1] > s[2]) { const int t = s[1]; s[1] = s[2]; s[2] = t; }
                    if (s[0] > s[1]) { const int t = s[0]; s[0] = s[1]; s[1] = t; }
                    int r = -1;
                    for (int k = 0; k < NTRI; ++k)
                        if (unpack[k][0] == s[0] && unpack[k][1] == s[1] && unpack[k][2] == s[2]) r = k;
                    rank[(a * DIM + b) * DIM + c] = r;
                }
    }
};
inline constexpr TripleTable kTriples{};

constexpr int triple_index(int a, int b, int c) {
    return kTriples.rank[(a * DIM + b) * DIM + c];
}

// Flat offsets into the derivative-coordinate blocks.
constexpr int z1_index(int mu, int nu, int a) { return pair_index(mu, nu) * DIM + a; }
constexpr int z2_index(int mu, int nu, int a, int b) { return pair_index(mu, nu) * NPAIR + pair_index(a, b); }
constexpr int z3_index(int mu, int nu, int a, int b, int c) { return pair_index(mu, nu) * NTRI + triple_index(a, b, c); }

// Orbit sizes of the stored coordinates, used by the symmetrized-derivative
// convention (a partial with respect to a stored coordinate is distributed
// evenly over the coordinate's index orbit).
constexpr int y_orbit(int p) { return kPairs.mult[p]; }
constexpr int z1_orbit(int idx) { return kPairs.mult[idx / DIM]; }
constexpr int z2_orbit(int idx) { return kPairs.mult[idx / NPAIR] * kPairs.mult[idx % NPAIR]; }
constexpr int z3_orbit(int idx) { return kPairs.mult[idx / NTRI] * kTriples.mult[idx % NTRI]; }

template <class S> using Sym2 = std::array<S, NPAIR>;   // y_{mu nu}
template <class S> using Z1Block = std::array<S, NZ1>;  // z_{mu nu | a}
template <class S> using Z2Block = std::array<S, NZ2>;  // z_{mu nu | ab}
template <class S> using Z3Block = std::array<S, NZ3>;  // z_{mu nu | abc}

template <class S> const S& sym2_at(const Sym2<S>& y, int mu, int nu) { return y[pair_index(mu, nu)]; }
template <class S> S& sym2_at(Sym2<S>& y, int mu, int nu) { return y[pair_index(mu, nu)]; }
template <class S> const S& z1_at(const Z1Block<S>& z, int mu, int nu, int a) { return z[z1_index(mu, nu, a)]; }
template <class S> S& z1_at(Z1Block<S>& z, int mu, int nu, int a) { return z[z1_index(mu, nu, a)]; }
template <class S> const S& z2_at(const Z2Block<S>& z, int mu, int nu, int a, int b) { return z[z2_index(mu, nu, a, b)]; }
template <class S> S& z2_at(Z2Block<S>& z, int mu, int nu, int a, int b) { return z[z2_index(mu, nu, a, b)]; }
template <class S> const S& z3_at(const Z3Block<S>& z, int mu, int nu, int a, int b, int c) { return z[z3_index(mu, nu, a, b, c)]; }
template <class S> S& z3_at(Z3Block<S>& z, int mu, int nu, int a, int b, int c) { return z[z3_index(mu, nu, a, b, c)]; }

} // namespace dedonder
