#include "dopsim/polcore.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dopsim/errors.hpp"

namespace dopsim {

namespace {

constexpr Complex kI{0.0, 1.0};

double eigen_min(const std::array<Complex, 4>& e) {
  const double a = e[0].real();
  const double d = e[3].real();
  const double half_gap = 0.5 * (a - d);
  return 0.5 * (a + d) - std::sqrt(half_gap * half_gap + std::norm(e[1]));
}

}  // namespace

double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

Vec3 normalized(Vec3 a) {
  const double n = norm(a);
  if (n == 0.0) throw UndefinedDirection("cannot normalize the zero vector");
  return (1.0 / n) * a;
}

Vec3 rotate(Vec3 v, Vec3 axis, double angle) {
  const double n = norm(axis);
  if (n == 0.0) throw UndefinedDirection("rotation axis is the zero vector");
  if (std::abs(n - 1.0) > kInputTol) {
    throw InvalidState("rotation axis is not normalized (|axis| = " + std::to_string(n) + ")");
  }
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return c * v + s * cross(axis, v) + ((1.0 - c) * dot(axis, v)) * axis;
}

PoincareVector::PoincareVector(double m1, double m2, double m3) : PoincareVector(Vec3{m1, m2, m3}) {}

PoincareVector::PoincareVector(Vec3 m) : m_(m) {
  if (!std::isfinite(m.x) || !std::isfinite(m.y) || !std::isfinite(m.z)) {
    throw InvalidState("Poincare vector has non-finite components");
  }
  if (dopsim::norm(m) > 1.0 + kExactTol) {
    throw InvalidState("unphysical Poincare vector, |M| = " + std::to_string(dopsim::norm(m)));
  }
}

StokesVector::StokesVector(double s0, double s1, double s2, double s3) : s0_(s0), s_{s1, s2, s3} {
  if (!(s0 >= 0.0)) throw InvalidState("Stokes S0 must be non-negative");
  if (dot(s_, s_) > s0 * s0 * (1.0 + kInputTol)) {
    throw InvalidState("Stokes vector exceeds S0 (S1^2+S2^2+S3^2 > S0^2)");
  }
}

StokesVector stokes_from(double intensity, const PoincareVector& m) {
  const Vec3 s = intensity * m.vec();
  return {intensity, s.x, s.y, s.z};
}

PoincareVector poincare_from_stokes(const StokesVector& s) {
  if (s.s0() == 0.0) throw UndefinedDop("polarization is undefined at zero intensity");
  return PoincareVector((1.0 / s.s0()) * s.polarized_part());
}

DensityMatrix::DensityMatrix(const std::array<Complex, 4>& entries) : e_(entries) {
  for (const auto& z : e_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw InvalidState("density matrix has non-finite entries");
    }
  }
  if (std::abs(e_[0].imag()) > kExactTol || std::abs(e_[3].imag()) > kExactTol ||
      std::abs(e_[1] - std::conj(e_[2])) > kExactTol) {
    throw InvalidState("density matrix is not Hermitian");
  }
  if (std::abs(e_[0].real() + e_[3].real() - 1.0) > kExactTol) {
    throw InvalidState("density matrix trace differs from 1");
  }
  if (eigen_min(e_) < -kExactTol) throw InvalidState("density matrix has a negative eigenvalue");
}

PureState::PureState(Complex h, Complex v) : h_(h), v_(v) {
  if (std::abs(std::norm(h) + std::norm(v) - 1.0) > kExactTol) {
    throw InvalidState("pure state is not unit norm");
  }
}

DensityMatrix PureState::density() const {
  return DensityMatrix({h_ * std::conj(h_), h_ * std::conj(v_), v_ * std::conj(h_), v_ * std::conj(v_)});
}

Unitary2 Unitary2::from_rotation(Vec3 axis, double angle) {
  const Vec3 n = normalized(axis);
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  // cos(a/2) 1 - i sin(a/2) (n1 s1 + n2 s2 + n3 s3)
  return Unitary2({Complex{c, -s * n.z}, Complex{-s * n.y, -s * n.x},
                   Complex{s * n.y, -s * n.x}, Complex{c, s * n.z}});
}

Unitary2::Unitary2(const std::array<Complex, 4>& entries) : u_(entries) {
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      Complex acc = (*this)(r, 0) * std::conj((*this)(c, 0)) + (*this)(r, 1) * std::conj((*this)(c, 1));
      if (std::abs(acc - (r == c ? 1.0 : 0.0)) > kInputTol) throw InvalidState("matrix is not unitary");
    }
  }
}

DensityMatrix Unitary2::conjugate(const DensityMatrix& rho) const {
  std::array<Complex, 4> out{};
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      Complex acc = 0.0;
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) acc += (*this)(r, i) * rho(i, j) * std::conj((*this)(c, j));
      }
      out[static_cast<std::size_t>(2 * r + c)] = acc;
    }
  }
  // Re-impose exact Hermiticity lost to rounding.
  out[0] = out[0].real();
  out[3] = out[3].real();
  out[2] = std::conj(out[1]);
  return DensityMatrix(out);
}

TwoPhotonOperator::TwoPhotonOperator(const Matrix4& entries) : m_(entries) {
  for (int r = 0; r < 4; ++r) {
    for (int c = r; c < 4; ++c) {
      if (std::abs((*this)(r, c) - std::conj((*this)(c, r))) > kExactTol) {
        throw InvalidState("two-photon operator is not Hermitian");
      }
    }
  }
}

Matrix4 kron(const std::array<Complex, 4>& a, const std::array<Complex, 4>& b) {
  Matrix4 out{};
  for (int ar = 0; ar < 2; ++ar) {
    for (int ac = 0; ac < 2; ++ac) {
      for (int br = 0; br < 2; ++br) {
        for (int bc = 0; bc < 2; ++bc) {
          out[static_cast<std::size_t>(4 * (2 * ar + br) + (2 * ac + bc))] =
              a[static_cast<std::size_t>(2 * ar + ac)] * b[static_cast<std::size_t>(2 * br + bc)];
        }
      }
    }
  }
  return out;
}

Matrix4 multiply(const Matrix4& a, const Matrix4& b) {
  Matrix4 out{};
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      Complex acc = 0.0;
      for (std::size_t k = 0; k < 4; ++k) acc += a[4 * r + k] * b[4 * k + c];
      out[4 * r + c] = acc;
    }
  }
  return out;
}

Complex trace(const Matrix4& m) { return m[0] + m[5] + m[10] + m[15]; }

TwoPhotonOperator conjugate_pair(const Unitary2& u, const TwoPhotonOperator& op) {
  const Matrix4 uu = kron(u.entries(), u.entries());
  Matrix4 uu_dag{};
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) uu_dag[4 * r + c] = std::conj(uu[4 * c + r]);
  }
  Matrix4 out = multiply(multiply(uu, op.entries()), uu_dag);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = r + 1; c < 4; ++c) out[4 * c + r] = std::conj(out[4 * r + c]);
    out[5 * r] = out[5 * r].real();
  }
  return TwoPhotonOperator(out);
}

DensityMatrix density_from_poincare(const PoincareVector& m) {
  if (m.norm() > 1.0 + kExactTol) throw InvalidState("unphysical state, |M| > 1");
  // (1 + m1 s1 + m2 s2 + m3 s3) / 2
  return DensityMatrix({Complex{0.5 * (1.0 + m.m3()), 0.0}, Complex{0.5 * m.m1(), -0.5 * m.m2()},
                        Complex{0.5 * m.m1(), 0.5 * m.m2()}, Complex{0.5 * (1.0 - m.m3()), 0.0}});
}

PoincareVector poincare_from_density(const DensityMatrix& rho) {
  // m_j = Tr(rho sigma_j)
  const double m1 = 2.0 * rho(1, 0).real();
  const double m2 = 2.0 * rho(1, 0).imag();
  const double m3 = rho(0, 0).real() - rho(1, 1).real();
  return PoincareVector(m1, m2, m3);
}

double dop(const PoincareVector& m) { return std::min(1.0, m.norm()); }

double dop(const StokesVector& s) { return dop(poincare_from_stokes(s)); }

DensityMatrix mix(std::span<const DensityMatrix> states, std::span<const double> weights) {
  if (states.size() != weights.size()) throw InvalidState("mix: states and weights differ in length");
  if (states.empty()) throw InvalidState("mix: no states given");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidState("mix: weights must be finite and non-negative");
    total += w;
  }
  if (total <= 0.0) throw InvalidState("mix: all weights are zero");
  std::array<Complex, 4> acc{};
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t k = 0; k < 4; ++k) acc[k] += (weights[i] / total) * states[i].entries()[k];
  }
  // Normalize the trace exactly; the mean of unit-trace matrices differs only by rounding.
  const double tr = acc[0].real() + acc[3].real();
  for (auto& z : acc) z /= tr;
  acc[0] = acc[0].real();
  acc[3] = acc[3].real();
  acc[2] = std::conj(acc[1]);
  return DensityMatrix(acc);
}

TwoPhotonOperator phased_pair_projector(double phase) {
  // |chi> = (|HV> - e^{i phase} |VH>) / sqrt(2)
  std::array<Complex, 4> chi{0.0, 1.0 / std::numbers::sqrt2, -std::exp(kI * phase) / std::numbers::sqrt2, 0.0};
  Matrix4 p{};
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) p[4 * r + c] = chi[r] * std::conj(chi[c]);
  }
  return TwoPhotonOperator(p);
}

TwoPhotonOperator singlet_projector() {
  Matrix4 p{};
  p[4 * 1 + 1] = 0.5;
  p[4 * 2 + 2] = 0.5;
  p[4 * 1 + 2] = -0.5;
  p[4 * 2 + 1] = -0.5;
  return TwoPhotonOperator(p);
}

TwoPhotonOperator identity_operator() {
  Matrix4 p{};
  for (std::size_t i = 0; i < 4; ++i) p[5 * i] = 1.0;
  return TwoPhotonOperator(p);
}

double singlet_probability(const DensityMatrix& rho_a, const DensityMatrix& rho_b) {
  const Vec3 a = poincare_from_density(rho_a).vec();
  const Vec3 b = poincare_from_density(rho_b).vec();
  return 0.25 * (1.0 - dot(a, b));
}

double brute_force_trace(const DensityMatrix& rho_a, const DensityMatrix& rho_b,
                         const TwoPhotonOperator& op) {
  const Complex t = trace(multiply(kron(rho_a.entries(), rho_b.entries()), op.entries()));
  if (std::abs(t.imag()) > kExactTol) throw NumericalError("trace of Hermitian product has imaginary residue");
  return t.real();
}

double poincare_angle(const PoincareVector& a, const PoincareVector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw UndefinedDirection("angle undefined for a zero Poincare vector");
  // atan2 form keeps precision near 0 and pi.
  return std::atan2(norm(cross(a.vec(), b.vec())), dot(a.vec(), b.vec()));
}

PoincareVector rotate_poincare(const PoincareVector& m, Vec3 axis, double angle) {
  Vec3 r = rotate(m.vec(), axis, angle);
  // Rounding may push a pure state a few ulps outside the sphere.
  const double n = norm(r);
  if (n > 1.0) r = (1.0 / n) * r;
  return PoincareVector(r);
}

}  // namespace dopsim
