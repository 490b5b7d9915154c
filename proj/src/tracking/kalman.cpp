#include "usv/tracking/kalman.hpp"

#include "usv/common.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace usv::tracking {

KalmanModel KalmanModel::constant_acceleration(double dt, double process_noise,
                                               double measurement_noise,
                                               double initial_covariance) {
    KalmanModel m;
    m.dt = dt;
    m.A = StateMatrix::Identity();
    for (int i = 0; i < 4; ++i) {
        m.A(i, 4 + i) = dt;
        m.A(i, 8 + i) = 0.5 * dt * dt;
        // acceleration drives velocity; the printed 8-row matrix omits this
        // coupling but a constant-acceleration model requires it
        m.A(4 + i, 8 + i) = dt;
    }
    m.H = ObsMatrix::Zero();
    m.H.leftCols<4>().setIdentity();
    m.Q = process_noise * StateMatrix::Identity();
    m.R = measurement_noise * MeasMatrix::Identity();
    m.P0 = initial_covariance * StateMatrix::Identity();
    return m;
}

KalmanEstimate kalman_init(const KalmanModel& model, const MeasVector& z) {
    KalmanEstimate est;
    est.state.setZero();
    est.state.head<4>() = z;
    est.covariance = model.P0;
    return est;
}

KalmanEstimate kalman_predict(const KalmanEstimate& est, const KalmanModel& model) {
    KalmanEstimate out;
    out.state = model.A * est.state;
    out.covariance = model.A * est.covariance * model.A.transpose() + model.Q;
    return out;
}

KalmanEstimate kalman_update(const KalmanEstimate& est, const MeasVector& z,
                             const KalmanModel& model) {
    const MeasMatrix s = model.H * est.covariance * model.H.transpose() + model.R;
    Eigen::FullPivLU<MeasMatrix> lu(s);
    if (!s.allFinite() || !lu.isInvertible()) {
        throw Error(ErrorCode::numerical_failure, "innovation covariance is singular");
    }
    const Eigen::Matrix<double, kStateDim, kMeasDim> gain =
        est.covariance * model.H.transpose() * lu.inverse();

    KalmanEstimate out;
    out.state = est.state + gain * (z - model.H * est.state);
    const StateMatrix i_kh = StateMatrix::Identity() - gain * model.H;
    out.covariance = i_kh * est.covariance * i_kh.transpose() + gain * model.R * gain.transpose();
    // symmetrize to keep round-off from accumulating
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    return out;
}

}  // namespace usv::tracking
