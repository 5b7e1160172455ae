#include "dggan/dataio/fixtures.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "dggan/core/errors.hpp"
#include "dggan/core/rng.hpp"
#include "dggan/dataio/image_io.hpp"
#include "dggan/dataio/types.hpp"

namespace dggan::dataio {

namespace {

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
Vec3 normalized(Vec3 a) {
  const double n = norm(a);
  return {a.x / n, a.y / n, a.z / n};
}

struct Mat3 {
  // row-major
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};
  Vec3 apply(Vec3 v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
};

Mat3 mul(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += a.m[i * 3 + k] * b.m[k * 3 + j];
      r.m[i * 3 + j] = s;
    }
  return r;
}

Mat3 rot_x(double t) {
  Mat3 r;
  r.m = {1, 0, 0, 0, std::cos(t), -std::sin(t), 0, std::sin(t), std::cos(t)};
  return r;
}
Mat3 rot_y(double t) {
  Mat3 r;
  r.m = {std::cos(t), 0, std::sin(t), 0, 1, 0, -std::sin(t), 0, std::cos(t)};
  return r;
}
Mat3 rot_z(double t) {
  Mat3 r;
  r.m = {std::cos(t), -std::sin(t), 0, std::sin(t), std::cos(t), 0, 0, 0, 1};
  return r;
}

struct Capsule {
  Vec3 a, b;
  double r;
};

// Smallest positive ray parameter t with |o + t*d - seg| = r, or +inf.
// Returns hit normal through *normal.
double intersect_capsule(Vec3 d, const Capsule& c, Vec3* normal) {
  constexpr double kInf = 1e30;
  double best = kInf;
  Vec3 best_n{};
  const Vec3 ba = c.b - c.a;
  const double len = norm(ba);
  const Vec3 u = len > 0 ? normalized(ba) : Vec3{0, 0, 1};
  // Infinite cylinder around the segment axis.
  {
    const Vec3 oc = Vec3{0, 0, 0} - c.a;
    const double card = dot(d, u);
    const double caoc = dot(oc, u);
    const double qa = 1.0 - card * card;
    const double qb = dot(oc, d) - caoc * card;
    const double qc = dot(oc, oc) - caoc * caoc - c.r * c.r;
    if (qa > 1e-12) {
      const double disc = qb * qb - qa * qc;
      if (disc >= 0) {
        const double t = (-qb - std::sqrt(disc)) / qa;
        if (t > 0) {
          const double s = caoc + t * card;
          if (s >= 0 && s <= len) {
            const Vec3 p = t * d;
            const Vec3 axis_pt = c.a + s * u;
            best = t;
            best_n = normalized(p - axis_pt);
          }
        }
      }
    }
  }
  // End-cap spheres.
  for (const Vec3& center : {c.a, c.b}) {
    const Vec3 oc = Vec3{0, 0, 0} - center;
    const double qb = dot(oc, d);
    const double qc = dot(oc, oc) - c.r * c.r;
    const double disc = qb * qb - qc;
    if (disc < 0) continue;
    const double t = -qb - std::sqrt(disc);
    if (t > 0 && t < best) {
      const Vec3 p = t * d;
      best = t;
      best_n = normalized(p - center);
    }
  }
  if (normal && best < kInf) *normal = best_n;
  return best;
}

constexpr int kJoints = 21;
constexpr int kFingers = 5;
constexpr double kDeg = M_PI / 180.0;

// wrist->MCP reach, then proximal/middle/distal phalanx lengths, per finger
// (thumb, index, middle, ring, pinky), in mm before global scale.
constexpr double kMcpLen[kFingers] = {30, 68, 70, 66, 58};
constexpr double kPhal[kFingers][3] = {
    {32, 22, 20}, {30, 20, 16}, {34, 22, 17}, {31, 20, 16}, {24, 16, 14}};
constexpr double kFanDeg[kFingers] = {-70, -25, 0, 15, 32};

struct HandPose {
  std::array<Vec3, kJoints> joints;  // camera frame, mm
  std::vector<Capsule> bones;
  HandSide side = HandSide::right;
};

HandPose sample_hand(Rng& rng, const CameraIntrinsics& cam, int image_size) {
  HandPose hand;
  const double scale = rng.uniform(0.72, 0.88);
  hand.side = rng.uniform() < 0.5 ? HandSide::left : HandSide::right;
  const double mirror = hand.side == HandSide::left ? -1.0 : 1.0;

  double flex1[kFingers], flex2[kFingers], abd[kFingers];
  for (int f = 0; f < kFingers; ++f) {
    flex1[f] = rng.uniform(f == 0 ? 0.0 : 5.0, f == 0 ? 25.0 : 40.0) * kDeg;
    flex2[f] = rng.uniform(f == 0 ? 5.0 : 10.0, f == 0 ? 35.0 : 55.0) * kDeg;
    abd[f] = rng.uniform(-6.0, 6.0) * kDeg;
  }
  const double roll = rng.uniform(0.0, 2.0 * M_PI);
  const double tilt_x = rng.uniform(-0.4, 0.4);
  const double tilt_y = rng.uniform(-0.4, 0.4);
  const double z0 = rng.uniform(360.0, 460.0);
  const double center_u = rng.uniform(image_size * 0.44, image_size * 0.56);
  const double center_v = rng.uniform(image_size * 0.44, image_size * 0.56);

  // Hand frame: x right, y toward the fingers, z = palm normal (faces the
  // camera before tilting). Flexion curls the chain away from the camera.
  std::array<Vec3, kJoints> local;
  local[0] = {0, 0, 0};
  const Vec3 n{0, 0, 1};
  for (int f = 0; f < kFingers; ++f) {
    const double fan = mirror * kFanDeg[f] * kDeg + abd[f];
    const Vec3 dir0{std::sin(fan), std::cos(fan), 0};
    const int base = 1 + f * 4;
    const double t1 = flex1[f];
    const double t2 = t1 + flex2[f];
    const double t3 = t2 + 0.66 * flex2[f];
    const auto bend = [&](double t) { return (std::cos(t) * dir0) + (-std::sin(t) * n); };
    local[base] = scale * kMcpLen[f] * dir0;
    local[base + 1] = local[base] + scale * kPhal[f][0] * bend(t1);
    local[base + 2] = local[base + 1] + scale * kPhal[f][1] * bend(t2);
    local[base + 3] = local[base + 2] + scale * kPhal[f][2] * bend(t3);
  }

  // Base orientation: palm toward camera, fingers up in the image.
  Mat3 base;
  base.m = {1, 0, 0, 0, -1, 0, 0, 0, -1};
  const Mat3 rot = mul(rot_x(tilt_x), mul(rot_y(tilt_y), mul(rot_z(roll), base)));

  for (int j = 0; j < kJoints; ++j) {
    const Vec3 p = rot.apply(local[j]);
    hand.joints[j] = {p.x, p.y, p.z + z0};
  }

  // Deterministic recentering: put the projected joint centroid at the drawn
  // image-center target.
  double mu = 0, mv = 0;
  for (const Vec3& p : hand.joints) {
    double u, v;
    cam.project(p.x, p.y, p.z, u, v);
    mu += u / kJoints;
    mv += v / kJoints;
  }
  const double shift_x = (center_u - mu) * z0 / cam.fx;
  const double shift_y = (center_v - mv) * z0 / cam.fy;
  for (Vec3& p : hand.joints) {
    p.x += shift_x;
    p.y += shift_y;
  }

  // Capsule radii stay within 5 mm of the joint axis so the rendered surface
  // depth at a joint's pixel stays close to the joint z.
  for (int f = 0; f < kFingers; ++f) {
    const int b = 1 + f * 4;
    hand.bones.push_back({hand.joints[0], hand.joints[b], 4.5});
    hand.bones.push_back({hand.joints[b], hand.joints[b + 1], 4.0});
    hand.bones.push_back({hand.joints[b + 1], hand.joints[b + 2], 3.5});
    hand.bones.push_back({hand.joints[b + 2], hand.joints[b + 3], 3.0});
  }
  return hand;
}

}  // namespace

void gen_fixtures(int count, int image_size, std::uint64_t seed,
                  const std::filesystem::path& out_root, int eval_count) {
  if (count <= 0) throw Error("gen_fixtures: count must be positive");
  if (eval_count < 0 || eval_count > count) throw Error("gen_fixtures: bad eval_count");
  std::error_code ec;
  std::filesystem::create_directories(out_root, ec);
  if (ec || !std::filesystem::is_directory(out_root))
    throw IoError("gen_fixtures: cannot create output root " + out_root.string());

  Rng rng(seed);
  const double far_mm = 750.0;
  nlohmann::json records = nlohmann::json::array();
  std::vector<std::string> train_ids, eval_ids;

  for (int i = 0; i < count; ++i) {
    CameraIntrinsics cam;
    cam.fx = cam.fy = 1.75 * image_size;
    cam.cx = cam.cy = image_size / 2.0;

    const HandPose hand = sample_hand(rng, cam, image_size);
    const double light_x = rng.uniform(-0.6, 0.6);
    const double light_y = rng.uniform(-0.6, 0.6);
    const Vec3 light = normalized({light_x, light_y, 1.0});  // from camera side
    const double bg_base = rng.uniform(0.08, 0.30);
    const double bg_angle = rng.uniform(0.0, 2.0 * M_PI);
    const double bg_slope = rng.uniform(0.05, 0.20);

    Tensor rgb({image_size, image_size, 3});
    Tensor depth({image_size, image_size});
    for (int py = 0; py < image_size; ++py) {
      for (int px = 0; px < image_size; ++px) {
        const Vec3 dir = normalized(
            {(px + 0.5 - cam.cx) / cam.fx, (py + 0.5 - cam.cy) / cam.fy, 1.0});
        double best_t = 1e30;
        Vec3 best_n{};
        for (const Capsule& c : hand.bones) {
          Vec3 n{};
          const double t = intersect_capsule(dir, c, &n);
          if (t < best_t) {
            best_t = t;
            best_n = n;
          }
        }
        if (best_t < 1e29) {
          const Vec3 hit = best_t * dir;
          depth.at(py, px) = hit.z;
          const double diffuse = std::max(0.0, dot(best_n, -1.0 * light));
          const double shade = 0.25 + 0.75 * diffuse;
          rgb.at(py, px, 0) = std::min(1.0, 0.87 * shade);
          rgb.at(py, px, 1) = std::min(1.0, 0.70 * shade);
          rgb.at(py, px, 2) = std::min(1.0, 0.58 * shade);
        } else {
          depth.at(py, px) = far_mm;
          const double ax = std::cos(bg_angle) * (px / static_cast<double>(image_size)) +
                            std::sin(bg_angle) * (py / static_cast<double>(image_size));
          const double g = bg_base + bg_slope * (ax + 0.5);
          rgb.at(py, px, 0) = std::min(1.0, 0.92 * g);
          rgb.at(py, px, 1) = std::min(1.0, 0.96 * g);
          rgb.at(py, px, 2) = std::min(1.0, 1.05 * g);
        }
      }
    }

    char id[32];
    std::snprintf(id, sizeof(id), "rec_%04d", i);
    const std::string rgb_name = std::string(id) + "_rgb.ppm";
    const std::string depth_name = std::string(id) + "_depth.pgm";
    const std::string kp_name = std::string(id) + "_kp.txt";

    write_ppm8(out_root / rgb_name, rgb);
    write_pgm16(out_root / depth_name, depth);

    {
      std::ofstream kp(out_root / kp_name);
      if (!kp) throw IoError("gen_fixtures: cannot write " + (out_root / kp_name).string());
      char line[160];
      for (int j = 0; j < kJoints; ++j) {
        const Vec3& p = hand.joints[j];
        double u, v;
        cam.project(p.x, p.y, p.z, u, v);
        std::snprintf(line, sizeof(line), "%.6f %.6f %.6f %.6f %.6f\n", u, v, p.x, p.y, p.z);
        kp << line;
      }
    }

    records.push_back({{"id", id},
                       {"rgb", rgb_name},
                       {"depth", depth_name},
                       {"keypoints", kp_name},
                       {"hand_side", to_string(hand.side)},
                       {"intrinsics",
                        {{"fx", cam.fx}, {"fy", cam.fy}, {"cx", cam.cx}, {"cy", cam.cy}}}});
    if (i >= count - eval_count)
      eval_ids.emplace_back(id);
    else
      train_ids.emplace_back(id);
  }

  nlohmann::json manifest = {{"layout", "fixture"},
                             {"k", kJoints},
                             {"image_size", image_size},
                             {"records", records},
                             {"splits", {{"train", train_ids}, {"eval", eval_ids}}}};
  std::ofstream mf(out_root / "manifest.json");
  if (!mf) throw IoError("gen_fixtures: cannot write manifest");
  mf << manifest.dump(2) << "\n";
}

}  // namespace dggan::dataio
