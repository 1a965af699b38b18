#ifndef BARNSIM_TYPES_HPP
#define BARNSIM_TYPES_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace barnsim {

using Scalar = double;

using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
using Rot2 = Eigen::Rotation2D<Scalar>;

}  // namespace barnsim

#endif
