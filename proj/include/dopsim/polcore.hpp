#pragma once

// Polarization-state algebra: Stokes and Poincare descriptors, single-photon
// density matrices, and two-photon projective measurements in the ordered
// basis {HH, HV, VH, VV}.
//
// Basis convention (frozen across the library):
//   sigma_3 eigenstates are H (+1) and V (-1),
//   sigma_1 eigenstates are +45 / -45 linear,
//   sigma_2 eigenstates are the two circular states.
// Rotations on the Poincare sphere follow the right-hand rule.

#include <array>
#include <complex>
#include <span>

namespace dopsim {

using Complex = std::complex<double>;

/// Tolerance for exact linear-algebra identities.
inline constexpr double kExactTol = 1e-12;
/// Tolerance for validating user-supplied inputs.
inline constexpr double kInputTol = 1e-9;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return s * a; }
  friend constexpr bool operator==(Vec3, Vec3) = default;
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double norm(Vec3 a);
/// Throws UndefinedDirection for the zero vector.
Vec3 normalized(Vec3 a);

/// Rodrigues rotation of `v` about unit `axis` by `angle` (right-hand rule).
/// The axis must have unit norm within kInputTol.
Vec3 rotate(Vec3 v, Vec3 axis, double angle);

/// Poincare vector M with M_j = S_j / S_0; |M| is the degree of polarization.
class PoincareVector {
 public:
  PoincareVector() = default;
  PoincareVector(double m1, double m2, double m3);
  explicit PoincareVector(Vec3 m);

  double m1() const noexcept { return m_.x; }
  double m2() const noexcept { return m_.y; }
  double m3() const noexcept { return m_.z; }
  Vec3 vec() const noexcept { return m_; }
  double norm() const { return dopsim::norm(m_); }

 private:
  Vec3 m_{};
};

class StokesVector {
 public:
  StokesVector(double s0, double s1, double s2, double s3);

  double s0() const noexcept { return s0_; }
  double s1() const noexcept { return s_.x; }
  double s2() const noexcept { return s_.y; }
  double s3() const noexcept { return s_.z; }
  Vec3 polarized_part() const noexcept { return s_; }

 private:
  double s0_;
  Vec3 s_;
};

/// Stokes vector of a beam with the given intensity and polarization.
StokesVector stokes_from(double intensity, const PoincareVector& m);
/// Throws UndefinedDop when s0 == 0.
PoincareVector poincare_from_stokes(const StokesVector& s);

/// 2x2 Hermitian, unit-trace, positive semidefinite matrix in the {H, V} basis.
class DensityMatrix {
 public:
  /// Row-major entries {rho_HH, rho_HV, rho_VH, rho_VV}. Rejects matrices
  /// that are not Hermitian, not unit trace, or have a negative eigenvalue
  /// (all within kExactTol).
  explicit DensityMatrix(const std::array<Complex, 4>& entries);

  Complex operator()(int row, int col) const { return e_[static_cast<std::size_t>(2 * row + col)]; }
  const std::array<Complex, 4>& entries() const noexcept { return e_; }

 private:
  std::array<Complex, 4> e_;
};

/// Unit-norm polarization ket a_H |H> + a_V |V>.
class PureState {
 public:
  PureState(Complex h, Complex v);

  Complex h() const noexcept { return h_; }
  Complex v() const noexcept { return v_; }
  DensityMatrix density() const;

 private:
  Complex h_;
  Complex v_;
};

/// 2x2 unitary acting on single-photon polarization.
class Unitary2 {
 public:
  /// exp(-i angle/2 n.sigma): conjugating a density matrix by this operator
  /// rotates its Poincare vector by `angle` about `axis` (right-hand rule).
  static Unitary2 from_rotation(Vec3 axis, double angle);
  /// Rejects matrices with |U U^dagger - 1| above kInputTol.
  explicit Unitary2(const std::array<Complex, 4>& entries);

  Complex operator()(int row, int col) const { return u_[static_cast<std::size_t>(2 * row + col)]; }
  const std::array<Complex, 4>& entries() const noexcept { return u_; }
  DensityMatrix conjugate(const DensityMatrix& rho) const;

 private:
  std::array<Complex, 4> u_;
};

using Matrix4 = std::array<Complex, 16>;

/// Hermitian 4x4 operator on the two-photon space, basis order {HH, HV, VH, VV}.
class TwoPhotonOperator {
 public:
  explicit TwoPhotonOperator(const Matrix4& entries);

  Complex operator()(int row, int col) const { return m_[static_cast<std::size_t>(4 * row + col)]; }
  const Matrix4& entries() const noexcept { return m_; }

 private:
  Matrix4 m_;
};

/// Kronecker product of two single-photon matrices in the {HH, HV, VH, VV} order.
Matrix4 kron(const std::array<Complex, 4>& a, const std::array<Complex, 4>& b);
Matrix4 multiply(const Matrix4& a, const Matrix4& b);
Complex trace(const Matrix4& m);
/// (U (x) U) op (U (x) U)^dagger.
TwoPhotonOperator conjugate_pair(const Unitary2& u, const TwoPhotonOperator& op);

DensityMatrix density_from_poincare(const PoincareVector& m);
PoincareVector poincare_from_density(const DensityMatrix& rho);

double dop(const PoincareVector& m);
/// Throws UndefinedDop for a zero-intensity beam.
double dop(const StokesVector& s);

/// Intensity-weighted convex combination. Weights must be non-negative with at
/// least one positive entry, and match `states` in length.
DensityMatrix mix(std::span<const DensityMatrix> states, std::span<const double> weights);

/// Projector onto (|HV> - |VH>)/sqrt(2).
TwoPhotonOperator singlet_projector();
/// Projector onto (|HV> - e^{i phase}|VH>)/sqrt(2); phase 0 is the singlet,
/// phase pi the symmetric triplet component.
TwoPhotonOperator phased_pair_projector(double phase);
TwoPhotonOperator identity_operator();

/// Tr(rho_a (x) rho_b P_singlet) = (1 - M_a.M_b)/4.
double singlet_probability(const DensityMatrix& rho_a, const DensityMatrix& rho_b);

/// Tr((rho_a (x) rho_b) op) with the 4x4 product formed explicitly. Throws
/// NumericalError if the imaginary residue exceeds kExactTol.
double brute_force_trace(const DensityMatrix& rho_a, const DensityMatrix& rho_b,
                         const TwoPhotonOperator& op);

/// Angle on the sphere between two Poincare vectors (2*phi), in [0, pi].
/// Throws UndefinedDirection for a zero vector.
double poincare_angle(const PoincareVector& a, const PoincareVector& b);

/// Rigid rotation about a unit axis. Throws UndefinedDirection for a zero axis
/// and InvalidState for an axis not normalized within kInputTol.
PoincareVector rotate_poincare(const PoincareVector& m, Vec3 axis, double angle);

}  // namespace dopsim
