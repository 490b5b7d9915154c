#pragma once

// Constant-acceleration Kalman filter over the two corners of an image box.
// State layout: [x_min, y_min, x_max, y_max, 4 velocities, 4 accelerations].

#include <Eigen/Core>

namespace usv::tracking {

inline constexpr int kStateDim = 12;
inline constexpr int kMeasDim = 4;

using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;
using MeasVector = Eigen::Matrix<double, kMeasDim, 1>;
using MeasMatrix = Eigen::Matrix<double, kMeasDim, kMeasDim>;
using ObsMatrix = Eigen::Matrix<double, kMeasDim, kStateDim>;

struct KalmanModel {
    StateMatrix A;
    ObsMatrix H;
    StateMatrix Q;
    MeasMatrix R;
    StateMatrix P0;
    double dt = 1.0;

    /// Defaults: Q = 1e-2 I, R = I, P0 = 10 I, dt = 1 frame.
    static KalmanModel constant_acceleration(double dt = 1.0, double process_noise = 1e-2,
                                             double measurement_noise = 1.0,
                                             double initial_covariance = 10.0);
};

struct KalmanEstimate {
    StateVector state;
    StateMatrix covariance;
};

KalmanEstimate kalman_init(const KalmanModel& model, const MeasVector& z);

KalmanEstimate kalman_predict(const KalmanEstimate& est, const KalmanModel& model);

/// Gain K = P H^T (H P H^T + R)^-1, Joseph-form covariance. Throws
/// ErrorCode::numerical_failure if the innovation covariance is singular.
KalmanEstimate kalman_update(const KalmanEstimate& est, const MeasVector& z,
                             const KalmanModel& model);

}  // namespace usv::tracking
