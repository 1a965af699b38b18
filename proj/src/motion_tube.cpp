#include "barnsim/motion_tube.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "barnsim/swept.hpp"

namespace barnsim {

std::vector<Scalar> TubeParams::velocity_levels() const {
  std::vector<Scalar> levels(velocity_level_count);
  if (velocity_level_count == 1) {
    levels[0] = velocity_min;
    return levels;
  }
  for (int i = 0; i < velocity_level_count; ++i) {
    levels[i] = velocity_min + (velocity_max - velocity_min) * i /
                                   (velocity_level_count - 1);
  }
  return levels;
}

Scalar TubeParams::curvature_limit(Scalar v) const {
  return std::min(curvature_max, max_heading_change / (v * horizon));
}

TubeLibrary::TubeLibrary(std::vector<MotionTube> tubes, TubeParams params,
                         BeamConfig beam_config)
    : tubes_(std::move(tubes)),
      params_(std::move(params)),
      beam_config_(beam_config) {
  build_flat();
}

void TubeLibrary::build_flat() {
  flat_beams_.clear();
  flat_dists_.clear();
  spans_.clear();
  spans_.reserve(tubes_.size());
  for (const MotionTube& tube : tubes_) {
    const std::size_t offset = flat_beams_.size();
    for (const auto& [beam, dist] : tube.beam_projection) {
      flat_beams_.push_back(beam);
      flat_dists_.push_back(dist);
    }
    spans_.emplace_back(offset, tube.beam_projection.size());
  }
}

bool TubeLibrary::tube_available(int tube_index, const LaserScan& scan) const {
  if (tubes_[tube_index].blind) return false;
  const auto& [offset, count] = spans_[tube_index];
  const Scalar* ranges = scan.ranges.data();
  for (std::size_t k = 0; k < count; ++k) {
    if (ranges[flat_beams_[offset + k]] <= flat_dists_[offset + k])
      return false;
  }
  return true;
}

void TubeLibrary::availability(const LaserScan& scan,
                               std::vector<std::uint8_t>& out) const {
  out.resize(tubes_.size());
  for (std::size_t i = 0; i < tubes_.size(); ++i)
    out[i] = tube_available(static_cast<int>(i), scan) ? 1 : 0;
}

bool TubeLibrary::operator==(const TubeLibrary& other) const {
  if (tubes_.size() != other.tubes_.size()) return false;
  if (!(beam_config_ == other.beam_config_)) return false;
  for (std::size_t i = 0; i < tubes_.size(); ++i) {
    const MotionTube& a = tubes_[i];
    const MotionTube& b = other.tubes_[i];
    if (a.v != b.v || a.kappa != b.kappa || a.blind != b.blind ||
        a.out_of_fov_count != b.out_of_fov_count ||
        a.endpoint.x != b.endpoint.x || a.endpoint.y != b.endpoint.y ||
        a.endpoint.theta != b.endpoint.theta ||
        a.boundary_samples.size() != b.boundary_samples.size() ||
        a.beam_projection != b.beam_projection)
      return false;
    for (std::size_t k = 0; k < a.boundary_samples.size(); ++k) {
      if (a.boundary_samples[k] != b.boundary_samples[k]) return false;
    }
  }
  return true;
}

namespace {

MotionTube build_tube(Scalar v, Scalar kappa, const TubeParams& params,
                      const BeamConfig& beam_config) {
  MotionTube tube;
  tube.v = v;
  tube.kappa = kappa;
  tube.endpoint = arc_endpoint(v, kappa, params.horizon);
  tube.boundary_samples = swept_arc_boundary(
      params.footprint.inflated(), v, kappa, params.horizon, params.d_sample);

  const Pose2 mount = beam_config.mount_offset;
  const Scalar half_fov = 0.5 * beam_config.fov;
  const Scalar angle_min = beam_config.angle_min();
  const Scalar increment = beam_config.angle_increment();
  tube.beam_projection.reserve(tube.boundary_samples.size());
  for (const Vec2& sample : tube.boundary_samples) {
    const Vec2 in_sensor = mount.to_local(sample);
    const Scalar bearing = std::atan2(in_sensor.y(), in_sensor.x());
    if (std::abs(bearing) > half_fov) {
      ++tube.out_of_fov_count;
      continue;
    }
    const int beam = std::clamp(
        static_cast<int>(std::lround((bearing - angle_min) / increment)), 0,
        beam_config.beam_count - 1);
    tube.beam_projection.emplace_back(beam, in_sensor.norm());
  }
  tube.blind =
      tube.out_of_fov_count * 2 > static_cast<int>(tube.boundary_samples.size());
  return tube;
}

}  // namespace

TubeLibrary build_tube_library(const TubeParams& params,
                               const BeamConfig& beam_config) {
  if (params.velocity_level_count < 1 || params.curvatures_per_level < 2)
    throw std::invalid_argument("tube params: level counts");
  if (params.velocity_min <= 0.0 || params.velocity_max < params.velocity_min)
    throw std::invalid_argument("tube params: velocity range");
  if (params.d_sample <= 0.0 || params.horizon <= 0.0)
    throw std::invalid_argument("tube params: horizon/d_sample");

  std::vector<MotionTube> tubes;
  tubes.reserve(params.tube_count());
  const int m = params.curvatures_per_level;
  for (const Scalar v : params.velocity_levels()) {
    const Scalar k_max = params.curvature_limit(v);
    for (int j = 0; j < m; ++j) {
      // Symmetric spacing: kappa(j) == -kappa(m-1-j) exactly.
      const Scalar kappa = k_max * ((2.0 * j - (m - 1)) / (m - 1));
      tubes.push_back(build_tube(v, kappa, params, beam_config));
    }
  }
  return TubeLibrary(std::move(tubes), params, beam_config);
}

Scalar tube_cost(const MotionTube& tube, const Vec2& subgoal_robot) {
  return (tube.endpoint.position() - subgoal_robot).norm();
}

std::optional<Twist> select_command(const TubeLibrary& library,
                                    const LaserScan& scan,
                                    const Vec2& subgoal_robot) {
  const TubeParams& params = library.params();
  Scalar weight_sum = 0.0;
  Scalar v_sum = 0.0;
  Scalar omega_sum = 0.0;
  const auto& tubes = library.tubes();
  for (int i = 0; i < library.size(); ++i) {
    if (!library.tube_available(i, scan)) continue;
    const Scalar cost = tube_cost(tubes[i], subgoal_robot);
    Scalar w;
    if (params.weight_profile == WeightProfile::kSoftmax) {
      w = std::exp(-cost / params.softmax_temperature);
    } else {
      w = 1.0 / (cost + params.weight_epsilon);
    }
    weight_sum += w;
    v_sum += w * tubes[i].v;
    omega_sum += w * tubes[i].v * tubes[i].kappa;
  }
  if (weight_sum <= 0.0) return std::nullopt;
  return Twist(v_sum / weight_sum, omega_sum / weight_sum);
}

namespace {

constexpr char kLibraryMagic[8] = {'B', 'S', 'T', 'L', '0', '0', '0', '1'};

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
}

}  // namespace

void save_tube_library(const TubeLibrary& library, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_tube_library: cannot open " + path);
  out.write(kLibraryMagic, sizeof(kLibraryMagic));

  const TubeParams& p = library.params();
  write_pod(out, p.velocity_level_count);
  write_pod(out, p.velocity_min);
  write_pod(out, p.velocity_max);
  write_pod(out, p.curvatures_per_level);
  write_pod(out, p.curvature_max);
  write_pod(out, p.max_heading_change);
  write_pod(out, p.horizon);
  write_pod(out, p.d_sample);
  write_pod(out, p.footprint.inflation_margin);
  const std::int32_t fp_n = static_cast<std::int32_t>(p.footprint.polygon.size());
  write_pod(out, fp_n);
  for (const Vec2& v : p.footprint.polygon) {
    write_pod(out, v.x());
    write_pod(out, v.y());
  }
  const std::int32_t profile = static_cast<std::int32_t>(p.weight_profile);
  write_pod(out, profile);
  write_pod(out, p.weight_epsilon);
  write_pod(out, p.softmax_temperature);

  const BeamConfig& b = library.beam_config();
  write_pod(out, b.fov);
  write_pod(out, b.beam_count);
  write_pod(out, b.max_range);
  write_pod(out, b.mount_offset.x);
  write_pod(out, b.mount_offset.y);
  write_pod(out, b.mount_offset.theta);

  const std::int32_t n_tubes = library.size();
  write_pod(out, n_tubes);
  for (const MotionTube& t : library.tubes()) {
    write_pod(out, t.v);
    write_pod(out, t.kappa);
    write_pod(out, t.endpoint.x);
    write_pod(out, t.endpoint.y);
    write_pod(out, t.endpoint.theta);
    write_pod(out, t.out_of_fov_count);
    const std::uint8_t blind = t.blind ? 1 : 0;
    write_pod(out, blind);
    const std::int32_t n_samples =
        static_cast<std::int32_t>(t.boundary_samples.size());
    write_pod(out, n_samples);
    for (const Vec2& s : t.boundary_samples) {
      write_pod(out, s.x());
      write_pod(out, s.y());
    }
    const std::int32_t n_proj =
        static_cast<std::int32_t>(t.beam_projection.size());
    write_pod(out, n_proj);
    for (const auto& [beam, dist] : t.beam_projection) {
      write_pod(out, beam);
      write_pod(out, dist);
    }
  }
  if (!out) throw std::runtime_error("save_tube_library: write failed");
}

TubeLibrary load_tube_library(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_tube_library: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kLibraryMagic, sizeof(magic)) != 0)
    throw std::runtime_error("load_tube_library: bad magic/version");

  TubeParams p;
  read_pod(in, p.velocity_level_count);
  read_pod(in, p.velocity_min);
  read_pod(in, p.velocity_max);
  read_pod(in, p.curvatures_per_level);
  read_pod(in, p.curvature_max);
  read_pod(in, p.max_heading_change);
  read_pod(in, p.horizon);
  read_pod(in, p.d_sample);
  read_pod(in, p.footprint.inflation_margin);
  std::int32_t fp_n = 0;
  read_pod(in, fp_n);
  p.footprint.polygon.resize(fp_n);
  for (auto& v : p.footprint.polygon) {
    Scalar x, y;
    read_pod(in, x);
    read_pod(in, y);
    v = Vec2(x, y);
  }
  std::int32_t profile = 0;
  read_pod(in, profile);
  p.weight_profile = static_cast<WeightProfile>(profile);
  read_pod(in, p.weight_epsilon);
  read_pod(in, p.softmax_temperature);

  BeamConfig b;
  read_pod(in, b.fov);
  read_pod(in, b.beam_count);
  read_pod(in, b.max_range);
  read_pod(in, b.mount_offset.x);
  read_pod(in, b.mount_offset.y);
  read_pod(in, b.mount_offset.theta);

  std::int32_t n_tubes = 0;
  read_pod(in, n_tubes);
  std::vector<MotionTube> tubes(n_tubes);
  for (MotionTube& t : tubes) {
    read_pod(in, t.v);
    read_pod(in, t.kappa);
    read_pod(in, t.endpoint.x);
    read_pod(in, t.endpoint.y);
    read_pod(in, t.endpoint.theta);
    read_pod(in, t.out_of_fov_count);
    std::uint8_t blind = 0;
    read_pod(in, blind);
    t.blind = blind != 0;
    std::int32_t n_samples = 0;
    read_pod(in, n_samples);
    t.boundary_samples.resize(n_samples);
    for (auto& s : t.boundary_samples) {
      Scalar x, y;
      read_pod(in, x);
      read_pod(in, y);
      s = Vec2(x, y);
    }
    std::int32_t n_proj = 0;
    read_pod(in, n_proj);
    t.beam_projection.resize(n_proj);
    for (auto& [beam, dist] : t.beam_projection) {
      read_pod(in, beam);
      read_pod(in, dist);
    }
  }
  if (!in) throw std::runtime_error("load_tube_library: truncated file");
  return TubeLibrary(std::move(tubes), std::move(p), b);
}

}  // namespace barnsim
