#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tcmem/errors.hpp"
#include "tcmem/model.hpp"
#include "tcmem/rng.hpp"

namespace tcmem {

// Hard cap for dense state-vector work: 2^14 = 16384 amplitudes.
inline constexpr int kMaxQubits = 14;

inline void check_oracle_size(int n_qubits) {
    if (n_qubits < 2) throw invalid_config("state vector needs at least 2 sites");
    if (n_qubits > kMaxQubits)
        throw resource_limit("dense simulation capped at " + std::to_string(kMaxQubits) +
                             " sites; got " + std::to_string(n_qubits));
}

// Dense n-qubit state. Basis index s encodes site n (1-based) in bit n-1,
// so the least significant bit is site 1; bit value 1 means Z = -1.
struct StateVector {
    int n_qubits = 0;
    Eigen::VectorXcd amplitudes;

    StateVector(int n, Eigen::VectorXcd amp) : n_qubits(n), amplitudes(std::move(amp)) {
        check_oracle_size(n);
        if (amplitudes.size() != (Eigen::Index{1} << n))
            throw invalid_config("state vector length must be 2^n_qubits");
        validate();
    }

    void validate() const {
        if (std::abs(amplitudes.norm() - 1.0) > 1e-12)
            throw numerical_error("state vector norm deviates from 1");
    }

    Eigen::Index dim() const { return amplitudes.size(); }

    static StateVector all_zero(int n) {
        check_oracle_size(n);
        Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(Eigen::Index{1} << n);
        amp(0) = 1.0;
        return StateVector(n, std::move(amp));
    }

    // (|0..0> + sign |1..1>)/sqrt(2)
    static StateVector ghz(int n, int sign) {
        check_oracle_size(n);
        Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(Eigen::Index{1} << n);
        const double r = 1.0 / std::sqrt(2.0);
        amp(0) = r;
        amp(amp.size() - 1) = sign >= 0 ? r : -r;
        return StateVector(n, std::move(amp));
    }
    static StateVector ghz_plus(int n) { return ghz(n, +1); }
    static StateVector ghz_minus(int n) { return ghz(n, -1); }
};

// H = -sum_n Delta_n Z_n Z_{n+1} + sum_n delta_n X_n, periodic (site N+1 = 1).
// Real symmetric in the Z basis.
inline Eigen::MatrixXd dense_hamiltonian(const CouplingModel& model) {
    model.validate();
    check_oracle_size(model.n_sites);
    const int N = model.n_sites;
    const Eigen::Index dim = Eigen::Index{1} << N;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index s = 0; s < dim; ++s) {
        double diag = 0.0;
        for (int n = 0; n < N; ++n) {
            const int zn = (s >> n) & 1 ? -1 : 1;
            const int znn = (s >> ((n + 1) % N)) & 1 ? -1 : 1;
            diag -= model.couplings[static_cast<std::size_t>(n)] * zn * znn;
        }
        H(s, s) = diag;
        for (int n = 0; n < N; ++n) {
            const Eigen::Index flipped = s ^ (Eigen::Index{1} << n);
            H(flipped, s) += model.fields[static_cast<std::size_t>(n)];
        }
    }
    return H;
}

// Exact evolution by one model Hamiltonian, reusing its eigendecomposition
// across arbitrarily many times.
class DenseEvolution {
public:
    explicit DenseEvolution(const CouplingModel& model)
        : n_qubits_(model.n_sites) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_hamiltonian(model));
        if (es.info() != Eigen::Success)
            throw numerical_error("dense Hamiltonian eigensolver failed");
        evals_ = es.eigenvalues();
        evecs_ = es.eigenvectors();
    }

    int n_qubits() const { return n_qubits_; }

    StateVector evolve(const StateVector& psi0, double t) const {
        if (psi0.n_qubits != n_qubits_)
            throw invalid_config("state size does not match evolution operator");
        const Eigen::VectorXcd y = evecs_.transpose() * psi0.amplitudes;
        Eigen::VectorXcd z(y.size());
        for (Eigen::Index i = 0; i < y.size(); ++i)
            z(i) = std::polar(1.0, -evals_(i) * t) * y(i);
        Eigen::VectorXcd out = evecs_ * z;
        // Unitarity guard; eigendecomposition drift would corrupt everything.
        const double norm = out.norm();
        if (std::abs(norm - 1.0) > 1e-10)
            throw numerical_error("evolved state lost unit norm");
        out /= norm;
        return StateVector(n_qubits_, std::move(out));
    }

    const Eigen::VectorXd& eigenvalues() const { return evals_; }

private:
    int n_qubits_;
    Eigen::VectorXd evals_;
    Eigen::MatrixXd evecs_;
};

// (1/N) sum_n <Z_n> on a computational-basis-diagonal observable.
inline double magnetization_of(const StateVector& psi) {
    const int N = psi.n_qubits;
    double m = 0.0;
    for (Eigen::Index s = 0; s < psi.dim(); ++s) {
        const double p = std::norm(psi.amplitudes(s));
        const int w = std::popcount(static_cast<std::uint64_t>(s));
        m += p * (N - 2 * w);
    }
    return m / N;
}

// <M(t)> for |0...0> evolved under the model Hamiltonian.
inline double exact_magnetization(const DenseEvolution& ev, double t) {
    return magnetization_of(ev.evolve(StateVector::all_zero(ev.n_qubits()), t));
}

inline double exact_magnetization(const CouplingModel& model, double t) {
    return exact_magnetization(DenseEvolution(model), t);
}

// Expectation of X applied to every site — conserved under every model
// Hamiltonian because it commutes with each ZZ bond and each X term.
inline double x_all_expectation(const StateVector& psi) {
    const Eigen::Index mask = psi.dim() - 1;
    std::complex<double> acc = 0.0;
    for (Eigen::Index s = 0; s < psi.dim(); ++s)
        acc += std::conj(psi.amplitudes(s)) * psi.amplitudes(s ^ mask);
    return acc.real();
}

// Arg( <GHZ+| Q^dag e^{-iHt} |GHZ+>  /  <GHZ-| Q^dag e^{-iHt} |GHZ-> ),
// with Q the X-flip pattern given as a bit mask (bit n-1 = flip site n).
inline double ghz_sector_phase(const DenseEvolution& ev, double t, std::uint64_t flips) {
    const int N = ev.n_qubits();
    const std::uint64_t mask = (std::uint64_t{1} << N) - 1;
    if (flips > mask) throw invalid_config("flip pattern uses sites beyond the chain");
    const StateVector up = ev.evolve(StateVector::ghz_plus(N), t);
    const StateVector dn = ev.evolve(StateVector::ghz_minus(N), t);
    const double r = 1.0 / std::sqrt(2.0);
    const std::complex<double> num =
        r * (up.amplitudes(static_cast<Eigen::Index>(flips)) +
             up.amplitudes(static_cast<Eigen::Index>(flips ^ mask)));
    const std::complex<double> den =
        r * (dn.amplitudes(static_cast<Eigen::Index>(flips)) -
             dn.amplitudes(static_cast<Eigen::Index>(flips ^ mask)));
    if (std::abs(num) < 1e-12 || std::abs(den) < 1e-12)
        throw undefined_phase("sector overlap magnitude below 1e-12; phase undefined");
    return std::arg(num / den);
}

inline double ghz_sector_phase(const CouplingModel& model, double t, std::uint64_t flips) {
    return ghz_sector_phase(DenseEvolution(model), t, flips);
}

// Z-basis samples of the evolved |0...0>; deterministic for a given seed.
inline std::vector<std::uint64_t> exact_sample(const DenseEvolution& ev, double t,
                                               int shots, std::uint64_t seed) {
    if (shots < 0) throw invalid_config("shot count must be non-negative");
    const StateVector psi = ev.evolve(StateVector::all_zero(ev.n_qubits()), t);
    std::vector<double> cdf(static_cast<std::size_t>(psi.dim()));
    double acc = 0.0;
    for (Eigen::Index s = 0; s < psi.dim(); ++s) {
        acc += std::norm(psi.amplitudes(s));
        cdf[static_cast<std::size_t>(s)] = acc;
    }
    cdf.back() = 1.0;  // guard against rounding at the top end
    Rng rng(seed);
    std::vector<std::uint64_t> out;
    out.reserve(static_cast<std::size_t>(shots));
    for (int k = 0; k < shots; ++k) {
        const double u = rng.uniform01();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        out.push_back(static_cast<std::uint64_t>(it - cdf.begin()));
    }
    return out;
}

inline std::vector<std::uint64_t> exact_sample(const CouplingModel& model, double t,
                                               int shots, std::uint64_t seed) {
    return exact_sample(DenseEvolution(model), t, shots, seed);
}

// Bitstring rendering: leftmost character is site 1.
inline std::string to_bitstring(std::uint64_t bits, int n_sites) {
    std::string s(static_cast<std::size_t>(n_sites), '0');
    for (int i = 0; i < n_sites; ++i)
        if ((bits >> i) & 1) s[static_cast<std::size_t>(i)] = '1';
    return s;
}

inline std::uint64_t from_bitstring(const std::string& s) {
    if (s.empty() || s.size() > 64) throw invalid_config("bitstring length out of range");
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '1')
            bits |= std::uint64_t{1} << i;
        else if (s[i] != '0')
            throw invalid_config("bitstring may contain only 0 and 1");
    }
    return bits;
}

}  // namespace tcmem
