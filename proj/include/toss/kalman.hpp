#pragma once

#include "toss/types.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace toss {

/// Constant-velocity filter state over [cx, cy, cz, theta, l, w, h,
/// vx, vy, vz]. theta, l, w, h follow a random walk through process noise.
struct KalmanState {
  static constexpr int kDim = 10;
  static constexpr int kMeasDim = 7;

  Eigen::Matrix<double, kDim, 1> mean = Eigen::Matrix<double, kDim, 1>::Zero();
  Eigen::Matrix<double, kDim, kDim> covariance =
      Eigen::Matrix<double, kDim, kDim>::Identity();

  BBox box() const {
    return {mean(0), mean(1), mean(2), wrap_pi(mean(3)),
            mean(4), mean(5), mean(6)};
  }
};

struct NoiseParams {
  // process noise standard deviations
  double q_pos = 0.1;
  double q_vel = 0.5;
  double q_angle = 0.05;
  double q_dims = 0.05;
  // measurement noise standard deviations
  double r_pos = 0.2;
  double r_angle = 0.1;
  double r_dims = 0.1;

  Eigen::Matrix<double, KalmanState::kDim, KalmanState::kDim> process() const {
    Eigen::Matrix<double, KalmanState::kDim, 1> d;
    d << q_pos * q_pos, q_pos * q_pos, q_pos * q_pos, q_angle * q_angle,
        q_dims * q_dims, q_dims * q_dims, q_dims * q_dims, q_vel * q_vel,
        q_vel * q_vel, q_vel * q_vel;
    return d.asDiagonal();
  }
  Eigen::Matrix<double, KalmanState::kMeasDim, KalmanState::kMeasDim>
  measurement() const {
    Eigen::Matrix<double, KalmanState::kMeasDim, 1> d;
    d << r_pos * r_pos, r_pos * r_pos, r_pos * r_pos, r_angle * r_angle,
        r_dims * r_dims, r_dims * r_dims, r_dims * r_dims;
    return d.asDiagonal();
  }
};

inline KalmanState kalman_init(const BBox& b, const NoiseParams& /*noise*/) {
  KalmanState s;
  s.mean << b.cx, b.cy, b.cz, b.theta, b.l, b.w, b.h, 0.0, 0.0, 0.0;
  Eigen::Matrix<double, KalmanState::kDim, 1> p0;
  p0 << 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 100.0, 100.0, 100.0;
  s.covariance = p0.asDiagonal();
  return s;
}

/// Advances position by velocity * dt and inflates the covariance by the
/// process noise. Output covariance stays PSD.
inline KalmanState kf_predict(const KalmanState& state, double dt,
                              const NoiseParams& noise) {
  if (!(dt > 0.0)) throw std::invalid_argument("kf_predict: dt must be > 0");
  using Mat = Eigen::Matrix<double, KalmanState::kDim, KalmanState::kDim>;
  Mat f = Mat::Identity();
  f(0, 7) = dt;
  f(1, 8) = dt;
  f(2, 9) = dt;
  KalmanState out;
  out.mean = f * state.mean;
  out.covariance = f * state.covariance * f.transpose() + noise.process();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

/// Standard update on the 7-dim box measurement with the heading innovation
/// wrapped to [-pi, pi). Joseph form plus re-symmetrization keeps the
/// covariance PSD; eigenvalues below -1e-6 are a hard error, tiny negatives
/// are clamped.
inline KalmanState kf_update(const KalmanState& state, const BBox& measurement,
                             const NoiseParams& noise) {
  constexpr int n = KalmanState::kDim;
  constexpr int m = KalmanState::kMeasDim;
  using MatNN = Eigen::Matrix<double, n, n>;
  using MatMN = Eigen::Matrix<double, m, n>;

  MatMN h = MatMN::Zero();
  h.block<m, m>(0, 0).setIdentity();

  Eigen::Matrix<double, m, 1> z;
  z << measurement.cx, measurement.cy, measurement.cz, measurement.theta,
      measurement.l, measurement.w, measurement.h;

  Eigen::Matrix<double, m, 1> innovation = z - h * state.mean;
  innovation(3) = wrap_pi(innovation(3));

  const Eigen::Matrix<double, m, m> r = noise.measurement();
  const Eigen::Matrix<double, m, m> s =
      h * state.covariance * h.transpose() + r;
  const Eigen::Matrix<double, n, m> gain =
      state.covariance * h.transpose() * s.inverse();

  KalmanState out;
  out.mean = state.mean + gain * innovation;
  out.mean(3) = wrap_pi(out.mean(3));

  const MatNN ikh = MatNN::Identity() - gain * h;
  out.covariance = ikh * state.covariance * ikh.transpose() +
                   gain * r * gain.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());

  Eigen::SelfAdjointEigenSolver<MatNN> eig(out.covariance);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig < -1e-6) {
    throw std::runtime_error("kf_update: covariance lost positive semidefiniteness");
  }
  if (min_eig < 0.0) {
    Eigen::Matrix<double, n, 1> vals = eig.eigenvalues().cwiseMax(0.0);
    out.covariance = eig.eigenvectors() * vals.asDiagonal() *
                     eig.eigenvectors().transpose();
  }
  return out;
}

}  // namespace toss
