#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "tcmem/errors.hpp"
#include "tcmem/model.hpp"

#if defined(TCMEM_HAVE_LAPACKE)
extern "C" void dgesdd_(const char* jobz, const int* m, const int* n, double* a,
                        const int* lda, double* s, double* u, const int* ldu,
                        double* vt, const int* ldvt, double* work, const int* lwork,
                        int* iwork, int* info);
#endif

namespace tcmem {

// Real antisymmetric matrix of even dimension 2N.
struct SkewMatrix {
    Eigen::MatrixXd m;

    explicit SkewMatrix(Eigen::MatrixXd mat) : m(std::move(mat)) {
        if (m.rows() != m.cols() || m.rows() % 2 != 0 || m.rows() == 0)
            throw invalid_config("SkewMatrix must be square with even dimension");
        const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        if ((m + m.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale)
            throw invalid_config("SkewMatrix input is not antisymmetric");
    }

    Eigen::Index dim() const { return m.rows(); }
    Eigen::Index n_pairs() const { return m.rows() / 2; }
};

// Single-particle matrix of the chain (0-based indices; site n is 1-based):
//   h[2n-2, 2n-1] = +delta_n   (field pair of site n)
//   h[2n-1, 2n mod 2N] = -Delta_n  (coupling pair, wrapping at the boundary)
// plus antisymmetric partners.
inline SkewMatrix build_h(const CouplingModel& model) {
    model.validate();
    const int N = model.n_sites;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * N, 2 * N);
    for (int n = 0; n < N; ++n) {
        const int a = 2 * n, b = 2 * n + 1, c = (2 * n + 2) % (2 * N);
        h(a, b) += model.fields[n];
        h(b, a) -= model.fields[n];
        h(b, c) -= model.couplings[n];
        h(c, b) += model.couplings[n];
    }
    return SkewMatrix(std::move(h));
}

// h of the unperturbed reference chain (all couplings 1, all fields 0).
inline SkewMatrix build_h0(int n_sites) {
    return build_h(build_uniform(n_sites, 1.0, 0.0));
}

// The reference matrix h0 is a signed permutation; these apply it in O(dim^2).
// Rows of h0: row a = -e_{a+1} for odd a, +e_{a-1} for even a (indices mod 2N).
inline Eigen::MatrixXd h0_times(const Eigen::MatrixXd& M) {
    const Eigen::Index d = M.rows();
    Eigen::MatrixXd out(d, M.cols());
    for (Eigen::Index a = 0; a < d; ++a) {
        if (a % 2 == 1)
            out.row(a) = -M.row((a + 1) % d);
        else
            out.row(a) = M.row((a + d - 1) % d);
    }
    return out;
}

// Columns of h0: col j = +e_{j+1} for odd j, -e_{j-1} for even j (mod 2N).
inline Eigen::MatrixXd times_h0(const Eigen::MatrixXd& M) {
    const Eigen::Index d = M.cols();
    Eigen::MatrixXd out(M.rows(), d);
    for (Eigen::Index j = 0; j < d; ++j) {
        if (j % 2 == 1)
            out.col(j) = M.col((j + 1) % d);
        else
            out.col(j) = -M.col((j + d - 1) % d);
    }
    return out;
}

// Spectral decomposition of a real antisymmetric matrix h (dim 2N):
// eigenvalues of h are +-i*lambda_k with lambda_k >= 0 (phases, ascending).
// `canonical` is a real orthogonal matrix whose column pair (2k, 2k+1) = (q, p)
// satisfies h q = lambda_k p and h p = -lambda_k q, so propagators are exact
// block rotations. `basis()` assembles the complex unitary diagonalizing i*h.
struct SpectralData {
    Eigen::VectorXd phases;     // N non-negative values, ascending
    Eigen::MatrixXd canonical;  // 2N x 2N orthogonal
    // True when computed through the even/odd SVD route, in which case q
    // columns live on even indices and p columns on odd indices exactly.
    bool split_basis = false;

    Eigen::Index dim() const { return canonical.rows(); }
    Eigen::Index n_pairs() const { return phases.size(); }

    // The even-support factor: W(r, k) = canonical(2r, 2k). Valid only for
    // split_basis data.
    Eigen::MatrixXd even_factor() const {
        const Eigen::Index n = n_pairs();
        Eigen::MatrixXd W(n, n);
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index k = 0; k < n; ++k) W(r, k) = canonical(2 * r, 2 * k);
        return W;
    }

    // The odd-support factor: V(r, k) = -canonical(2r+1, 2k+1).
    Eigen::MatrixXd odd_factor() const {
        const Eigen::Index n = n_pairs();
        Eigen::MatrixXd V(n, n);
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index k = 0; k < n; ++k) V(r, k) = -canonical(2 * r + 1, 2 * k + 1);
        return V;
    }

    // Columns: u_k = (q_k + i p_k)/sqrt(2) for +lambda_k (k ascending),
    // then conj(u_k) for -lambda_k. i h = basis * diag(eigenvalues) * basis^dag.
    Eigen::MatrixXcd basis() const {
        const Eigen::Index n = n_pairs();
        Eigen::MatrixXcd U(dim(), dim());
        const double r = 1.0 / std::sqrt(2.0);
        for (Eigen::Index k = 0; k < n; ++k) {
            const auto q = canonical.col(2 * k);
            const auto p = canonical.col(2 * k + 1);
            U.col(k) = r * (q + std::complex<double>(0, 1) * p);
            U.col(n + k) = r * (q - std::complex<double>(0, 1) * p);
        }
        return U;
    }

    // Eigenvalues of i*h in the column order of basis(): +phases then -phases.
    Eigen::VectorXd eigenvalues() const {
        const Eigen::Index n = n_pairs();
        Eigen::VectorXd e(2 * n);
        e.head(n) = phases;
        e.tail(n) = -phases;
        return e;
    }
};

namespace detail {

// SVD of a real N x N matrix: C = W * diag(sigma) * V^T, sigma descending.
inline void svd_real(const Eigen::MatrixXd& C, Eigen::MatrixXd& W, Eigen::VectorXd& sigma,
                     Eigen::MatrixXd& V) {
#if defined(TCMEM_HAVE_LAPACKE)
    const int n = static_cast<int>(C.rows());
    Eigen::MatrixXd A = C;  // dgesdd destroys its input
    W.resize(n, n);
    V.resize(n, n);
    sigma.resize(n);
    Eigen::MatrixXd Vt(n, n);
    std::vector<int> iwork(8 * n);
    int info = 0, lwork = -1;
    double wk_query = 0;
    dgesdd_("A", &n, &n, A.data(), &n, sigma.data(), W.data(), &n, Vt.data(), &n,
            &wk_query, &lwork, iwork.data(), &info);
    lwork = static_cast<int>(wk_query);
    std::vector<double> work(static_cast<size_t>(lwork));
    dgesdd_("A", &n, &n, A.data(), &n, sigma.data(), W.data(), &n, Vt.data(), &n,
            work.data(), &lwork, iwork.data(), &info);
    if (info != 0) throw numerical_error("SVD (dgesdd) failed to converge, info=" +
                                         std::to_string(info));
    V = Vt.transpose();
#else
    Eigen::BDCSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullU | Eigen::ComputeFullV);
    W = svd.matrixU();
    V = svd.matrixV();
    sigma = svd.singularValues();
#endif
}

// True when nonzeros connect only even<->odd indices (the chain's structure).
inline bool is_bipartite(const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (m(i, j) != 0.0 && (i + j) % 2 == 0) return false;
    return true;
}

}  // namespace detail

inline SpectralData spectral(const SkewMatrix& h) {
    const Eigen::Index N = h.n_pairs();
    SpectralData out;
    out.canonical.resize(2 * N, 2 * N);
    out.phases.resize(N);

    if (detail::is_bipartite(h.m)) {
        // Permuting odd-index rows/cols first gives h ~ [[0, C], [-C^T, 0]];
        // the SVD C = W S V^T yields exact canonical pairs q=(w;0), p=(0;-v).
        Eigen::MatrixXd C(N, N);
        for (Eigen::Index r = 0; r < N; ++r)
            for (Eigen::Index c = 0; c < N; ++c) C(r, c) = h.m(2 * r, 2 * c + 1);
        Eigen::MatrixXd W, V;
        Eigen::VectorXd sigma;
        detail::svd_real(C, W, sigma, V);
        out.canonical.setZero();
        for (Eigen::Index k = 0; k < N; ++k) {
            const Eigen::Index kk = N - 1 - k;  // reorder descending -> ascending
            out.phases(k) = sigma(kk);
            for (Eigen::Index r = 0; r < N; ++r) {
                out.canonical(2 * r, 2 * k) = W(r, kk);
                out.canonical(2 * r + 1, 2 * k + 1) = -V(r, kk);
            }
        }
        out.split_basis = true;
    } else {
        // General antisymmetric input: Hermitian eigendecomposition of i*h.
        Eigen::MatrixXcd ih = std::complex<double>(0, 1) * h.m.cast<std::complex<double>>();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ih);
        if (es.info() != Eigen::Success)
            throw numerical_error("eigensolver failed on i*h (dim " +
                                  std::to_string(2 * N) + ")");
        const Eigen::VectorXd& ev = es.eigenvalues();  // ascending: -lam .. +lam
        const double tol = 1e-12 * std::max(1.0, std::abs(ev(2 * N - 1)));
        // positive part, ascending
        std::vector<Eigen::Index> pos, zero;
        for (Eigen::Index i = 0; i < 2 * N; ++i) {
            if (ev(i) > tol)
                pos.push_back(i);
            else if (std::abs(ev(i)) <= tol)
                zero.push_back(i);
        }
        const Eigen::Index nz = static_cast<Eigen::Index>(zero.size());
        if (static_cast<Eigen::Index>(pos.size()) * 2 + nz != 2 * N)
            throw numerical_error("spectral: inconsistent +-pair structure of i*h");
        // For lambda > 0, sqrt(2)*Re(u) and sqrt(2)*Im(u) are orthonormal and
        // satisfy the canonical action (u and conj(u) belong to +-lambda).
        Eigen::Index col = nz;  // zero modes occupy the lowest-phase slots
        Eigen::Index ph = nz / 2;
        const double r2 = std::sqrt(2.0);
        for (Eigen::Index idx : pos) {
            Eigen::VectorXcd u = es.eigenvectors().col(idx);
            // u = (q + i p)/sqrt(2) for eigenvalue +lambda of i*h gives
            // h q = lambda p, h p = -lambda q, for any phase choice of u.
            out.canonical.col(col) = r2 * u.real();
            out.canonical.col(col + 1) = r2 * u.imag();
            out.phases(ph++) = ev(idx);
            col += 2;
        }
        if (nz > 0) {
            // Real orthonormal basis of the kernel from Re/Im of zero modes.
            Eigen::MatrixXd K(2 * N, 2 * nz);
            for (Eigen::Index i = 0; i < nz; ++i) {
                K.col(2 * i) = es.eigenvectors().col(zero[i]).real();
                K.col(2 * i + 1) = es.eigenvectors().col(zero[i]).imag();
            }
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(K);
            Eigen::MatrixXd Qfull = qr.householderQ();
            for (Eigen::Index i = 0; i < nz; ++i) {
                out.canonical.col(i) = Qfull.col(i);
                if (i % 2 == 0) out.phases(i / 2) = 0.0;
            }
        }
    }

    // The propagator algebra depends on exact orthonormality; verify it.
    const double ortho = (out.canonical.transpose() * out.canonical -
                          Eigen::MatrixXd::Identity(2 * N, 2 * N))
                             .cwiseAbs()
                             .maxCoeff();
    if (ortho > 1e-10)
        throw numerical_error("spectral: canonical basis lost orthonormality (" +
                              std::to_string(ortho) + ")");
    return out;
}

namespace detail {

// Left-multiply by the block-rotation exp(2 lambda t J) in the canonical basis:
// row pair (2k, 2k+1) -> [[c, -s], [s, c]] * rows, angle_k = 2 * phases_k * t.
inline void rotate_rows(Eigen::MatrixXd& M, const Eigen::VectorXd& phases, double t) {
    for (Eigen::Index k = 0; k < phases.size(); ++k) {
        const double c = std::cos(2.0 * phases(k) * t), s = std::sin(2.0 * phases(k) * t);
        Eigen::RowVectorXd top = M.row(2 * k);
        M.row(2 * k) = c * top - s * M.row(2 * k + 1);
        M.row(2 * k + 1) = s * top + c * M.row(2 * k + 1);
    }
}

// Right-multiply: column pair (2k, 2k+1) -> columns * [[c, -s], [s, c]].
inline void rotate_cols(Eigen::MatrixXd& M, const Eigen::VectorXd& phases, double t) {
    for (Eigen::Index k = 0; k < phases.size(); ++k) {
        const double c = std::cos(2.0 * phases(k) * t), s = std::sin(2.0 * phases(k) * t);
        Eigen::VectorXd left = M.col(2 * k);
        M.col(2 * k) = c * left + s * M.col(2 * k + 1);
        M.col(2 * k + 1) = -s * left + c * M.col(2 * k + 1);
    }
}

}  // namespace detail

// exp(2 h t), computed as canonical * blockrot(2 lambda t) * canonical^T.
inline Eigen::MatrixXd propagator(const SpectralData& s, double t) {
    if (!std::isfinite(t)) throw invalid_config("propagator: time must be finite");
    Eigen::MatrixXd R = s.canonical.transpose();
    detail::rotate_rows(R, s.phases, t);
    return s.canonical * R;
}

inline bool is_orthogonal(const Eigen::MatrixXd& M, double tol = 1e-10) {
    if (M.rows() != M.cols()) return false;
    return (M.transpose() * M - Eigen::MatrixXd::Identity(M.rows(), M.cols()))
               .cwiseAbs()
               .maxCoeff() <= tol;
}

// Ring distance between lattice sites of Majorana indices i, j (0-based).
inline int ring_site_distance(Eigen::Index i, Eigen::Index j, int n_sites) {
    const int mi = static_cast<int>(i / 2), mj = static_cast<int>(j / 2);
    const int d = std::abs(mi - mj);
    return std::min(d, n_sites - d);
}

// Per-distance maximum |entry| of exp(2ht), d = 0 .. floor(N/2) (ring metric).
inline std::vector<double> lightcone_profile(const SpectralData& s, int n_sites, double t) {
    const Eigen::MatrixXd P = propagator(s, t);
    std::vector<double> profile(static_cast<size_t>(n_sites / 2) + 1, 0.0);
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
        for (Eigen::Index j = 0; j < P.cols(); ++j) {
            const int d = ring_site_distance(i, j, n_sites);
            profile[static_cast<size_t>(d)] =
                std::max(profile[static_cast<size_t>(d)], std::abs(P(i, j)));
        }
    }
    return profile;
}

inline std::vector<double> lightcone_profile(const CouplingModel& model, double t) {
    return lightcone_profile(spectral(build_h(model)), model.n_sites, t);
}

// Largest distance whose amplitude reaches `threshold`; -1 if none does.
inline int lightcone_radius(const std::vector<double>& profile, double threshold = 1e-3) {
    int radius = -1;
    for (size_t d = 0; d < profile.size(); ++d)
        if (profile[d] >= threshold) radius = static_cast<int>(d);
    return radius;
}

}  // namespace tcmem
