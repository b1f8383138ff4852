/*
 * Copyright 2026 The osdf Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "osdf/heatmap.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>
#include <sstream>

namespace osdf {
namespace {

using nlohmann::json;

constexpr std::uint32_t kRasterVersion = 1;
constexpr std::size_t kRasterHeader = 24;

void check_target_center(const CenterTarget& c, int height, int width) {
  if (c.x < 0 || c.y < 0 || c.x >= width || c.y >= height)
    throw ConfigError("center (" + std::to_string(c.x) + ", " + std::to_string(c.y) + ") outside the map");
}

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

std::uint32_t get_u32(const std::string& in, std::size_t offset) {
  std::uint32_t v;
  std::memcpy(&v, in.data() + offset, 4);
  return v;
}

// Normalized squared distance; the largest splat is the smallest value.
double splat_exponent(const CenterTarget& c, double sigma, int x, int y) {
  const double dx = x - c.x, dy = y - c.y;
  return (dx * dx + dy * dy) / (2.0 * sigma * sigma);
}

}  // namespace

FeatureMap::FeatureMap(int h, int w, int c, double fill) : height(h), width(w), channels(c) {
  if (h < 0 || w < 0 || c < 0) throw ConfigError("feature map dimensions must be non-negative");
  data.assign(static_cast<std::size_t>(h) * static_cast<std::size_t>(w) * static_cast<std::size_t>(c), fill);
}

double splat_sigma(double bbox_width, double bbox_height, int downsample) {
  if (downsample <= 0) throw ConfigError("downsample factor must be positive");
  const double diag = std::hypot(bbox_width, bbox_height);
  return std::max(1.0, diag / (6.0 * downsample));
}

Heatmap splat_targets(std::span<const CenterTarget> centers, int height, int width, int downsample) {
  Heatmap map(height, width, 1, 0.0);
  for (const auto& c : centers) {
    check_target_center(c, height, width);
    const double sigma = splat_sigma(c.bbox_width, c.bbox_height, downsample);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const double v = std::exp(-splat_exponent(c, sigma, x, y));
        double& m = map.at(y, x);
        m = std::max(m, v);
      }
  }
  for (double& v : map.data) v = std::clamp(v, 0.0, 1.0);
  return map;
}

double heatmap_mse(const FeatureMap& pred, const FeatureMap& target) {
  if (!pred.same_shape(target)) throw ConfigError("heatmap_mse: shape mismatch");
  if (pred.data.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const double d = pred.data[i] - target.data[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.data.size());
}

std::vector<Peak> detect_peaks(const Heatmap& heatmap, double threshold) {
  if (heatmap.channels != 1) throw ConfigError("detect_peaks: heatmap must have one channel");
  std::vector<Peak> peaks;
  for (int y = 0; y < heatmap.height; ++y)
    for (int x = 0; x < heatmap.width; ++x) {
      const double v = heatmap.at(y, x);
      if (!(v >= threshold)) continue;
      bool strict = true;
      for (int dy = -1; dy <= 1 && strict; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int ny = y + dy, nx = x + dx;
          if (ny < 0 || nx < 0 || ny >= heatmap.height || nx >= heatmap.width) continue;
          if (heatmap.at(ny, nx) >= v) {
            strict = false;
            break;
          }
        }
      if (strict) peaks.push_back({x, y, v});
    }
  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.score > b.score; });
  return peaks;
}

void CodeMaps::validate() const {
  if (shape.height != texture.height || shape.width != texture.width || shape.height != pose.height ||
      shape.width != pose.width)
    throw ConfigError("code maps must share spatial dimensions");
  if (pose.channels != 13) throw ConfigError("pose map must have 13 channels");
}

std::vector<SampledObject> sample_codes(const CodeMaps& maps, std::span<const Peak> centers) {
  maps.validate();
  std::vector<SampledObject> out;
  out.reserve(centers.size());
  for (const Peak& p : centers) {
    if (p.x < 0 || p.y < 0 || p.x >= maps.shape.width || p.y >= maps.shape.height)
      throw ConfigError("sample_codes: center outside the code maps");
    SampledObject o;
    o.x = p.x;
    o.y = p.y;
    o.score = p.score;
    o.shape_code.resize(maps.shape.channels);
    for (int c = 0; c < maps.shape.channels; ++c) o.shape_code[c] = maps.shape.at(p.y, p.x, c);
    o.texture_code.resize(maps.texture.channels);
    for (int c = 0; c < maps.texture.channels; ++c) o.texture_code[c] = maps.texture.at(p.y, p.x, c);
    for (int c = 0; c < 13; ++c) o.pose_raw[static_cast<std::size_t>(c)] = maps.pose.at(p.y, p.x, c);
    o.pose = pose_from_raw(o.pose_raw);
    out.push_back(std::move(o));
  }
  return out;
}

double gated_l1(const FeatureMap& pred, const FeatureMap& gt, const Heatmap& target, double gate) {
  if (!pred.same_shape(gt)) throw ConfigError("gated_l1: prediction and ground truth differ in shape");
  if (target.height != pred.height || target.width != pred.width || target.channels != 1)
    throw ConfigError("gated_l1: target heatmap does not match the maps");
  double sum = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < pred.height; ++y)
    for (int x = 0; x < pred.width; ++x) {
      if (!(target.at(y, x) > gate)) continue;
      for (int c = 0; c < pred.channels; ++c) sum += std::abs(pred.at(y, x, c) - gt.at(y, x, c));
      count += static_cast<std::size_t>(pred.channels);
    }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double mask_ce(const FeatureMap& probabilities, std::span<const int> labels) {
  const std::size_t pixels = static_cast<std::size_t>(probabilities.height) * static_cast<std::size_t>(probabilities.width);
  if (labels.size() != pixels) throw ConfigError("mask_ce: label count does not match the probability map");
  double sum = 0.0;
  for (int y = 0; y < probabilities.height; ++y)
    for (int x = 0; x < probabilities.width; ++x) {
      double total = 0.0;
      for (int c = 0; c < probabilities.channels; ++c) {
        const double p = probabilities.at(y, x, c);
        if (!(p > 0.0)) throw ConfigError("mask_ce: probabilities must be positive");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-6) throw ConfigError("mask_ce: probabilities do not sum to 1");
      const int label = labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(probabilities.width) + static_cast<std::size_t>(x)];
      if (label < 0 || label >= probabilities.channels) throw ConfigError("mask_ce: label out of range");
      sum -= std::log(probabilities.at(y, x, label));
    }
  return sum;
}

double combined_loss(const LossParts& p, const LossWeights& w) {
  return w.inst * p.inst + w.sdf * p.sdf + w.tex * p.tex + w.mask * p.mask + w.pose * p.pose;
}

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !(cx >= 0.0) || !(cy >= 0.0))
    throw ConfigError("intrinsics: focal lengths must be positive and the principal point non-negative");
}

void depth_to_pointcloud(const DepthObservation& obs, int label, std::vector<Vec3>& points,
                         std::vector<Vec3>* colors) {
  obs.intrinsics.validate();
  const FeatureMap& depth = obs.depth;
  const std::size_t pixels = static_cast<std::size_t>(depth.height) * static_cast<std::size_t>(depth.width);
  if (depth.channels != 1) throw ConfigError("depth map must have one channel");
  if (obs.mask.size() != pixels) throw ConfigError("mask size does not match the depth map");
  const bool with_color = colors && !obs.color.data.empty();
  if (with_color && (obs.color.height != depth.height || obs.color.width != depth.width || obs.color.channels != 3))
    throw ConfigError("color map does not match the depth map");
  points.clear();
  if (colors) colors->clear();
  const Intrinsics& k = obs.intrinsics;
  for (int v = 0; v < depth.height; ++v)
    for (int u = 0; u < depth.width; ++u) {
      const int m = obs.mask[static_cast<std::size_t>(v) * static_cast<std::size_t>(depth.width) + static_cast<std::size_t>(u)];
      if (label < 0 ? m == 0 : m != label) continue;
      const double d = depth.at(v, u);
      if (!(d > 0.0)) continue;
      points.emplace_back((u - k.cx) * d / k.fx, (v - k.cy) * d / k.fy, d);
      if (with_color) colors->emplace_back(obs.color.at(v, u, 0), obs.color.at(v, u, 1), obs.color.at(v, u, 2));
    }
  if (points.empty()) throw EmptyObservationError("mask selects no pixels with valid depth");
}

std::vector<Vec3> depth_to_pointcloud(const FeatureMap& depth, std::span<const int> mask,
                                      const Intrinsics& intrinsics, int label) {
  DepthObservation obs;
  obs.depth = depth;
  obs.mask.assign(mask.begin(), mask.end());
  obs.intrinsics = intrinsics;
  std::vector<Vec3> points;
  depth_to_pointcloud(obs, label, points);
  return points;
}

DepthObservation render_sphere_depth(const Vec3& center, double radius, int height, int width,
                                     const Intrinsics& intrinsics) {
  intrinsics.validate();
  DepthObservation obs;
  obs.intrinsics = intrinsics;
  obs.depth = FeatureMap(height, width, 1, 0.0);
  obs.mask.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), 0);
  for (int v = 0; v < height; ++v)
    for (int u = 0; u < width; ++u) {
      const Vec3 ray((u - intrinsics.cx) / intrinsics.fx, (v - intrinsics.cy) / intrinsics.fy, 1.0);
      const double a = ray.squaredNorm(), b = ray.dot(center), c = center.squaredNorm() - radius * radius;
      const double disc = b * b - a * c;
      if (disc < 0.0) continue;
      const double s = (b - std::sqrt(disc)) / a;
      if (!(s > 0.0)) continue;
      obs.depth.at(v, u) = s;
      obs.mask[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) + static_cast<std::size_t>(u)] = 1;
    }
  return obs;
}

std::string encode_raster(const FeatureMap& map, RasterType type) {
  std::string out = "OSDM";
  put_u32(out, kRasterVersion);
  put_u32(out, static_cast<std::uint32_t>(map.height));
  put_u32(out, static_cast<std::uint32_t>(map.width));
  put_u32(out, static_cast<std::uint32_t>(map.channels));
  out.push_back(static_cast<char>(type));
  out.append(3, '\0');
  if (type == RasterType::kU8) {
    for (double v : map.data) out.push_back(static_cast<char>(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)))));
  } else {
    for (double v : map.data) {
      const float f = static_cast<float>(v);
      char b[4];
      std::memcpy(b, &f, 4);
      out.append(b, 4);
    }
  }
  return out;
}

FeatureMap decode_raster(const std::string& bytes, RasterType* type) {
  static_assert(std::endian::native == std::endian::little, "raster I/O assumes a little-endian host");
  if (bytes.size() < kRasterHeader || bytes.compare(0, 4, "OSDM") != 0) throw FormatError("raster: bad magic");
  if (get_u32(bytes, 4) != kRasterVersion) throw FormatError("raster: unsupported version");
  const std::uint32_t h = get_u32(bytes, 8), w = get_u32(bytes, 12), c = get_u32(bytes, 16);
  const auto dtype = static_cast<std::uint8_t>(bytes[20]);
  if (dtype > 1) throw FormatError("raster: unknown dtype");
  if (h > (1u << 20) || w > (1u << 20) || c > 4096) throw FormatError("raster: implausible dimensions");
  const std::size_t count = static_cast<std::size_t>(h) * w * c;
  const std::size_t sample = dtype == 0 ? 1 : 4;
  if (bytes.size() != kRasterHeader + count * sample) throw FormatError("raster: payload size mismatch");
  FeatureMap map(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
  const char* p = bytes.data() + kRasterHeader;
  for (std::size_t i = 0; i < count; ++i) {
    if (dtype == 0) {
      map.data[i] = static_cast<std::uint8_t>(p[i]);
    } else {
      float f;
      std::memcpy(&f, p + 4 * i, 4);
      map.data[i] = f;
    }
  }
  if (type) *type = static_cast<RasterType>(dtype);
  return map;
}

void write_raster(const std::filesystem::path& path, const FeatureMap& map, RasterType type) {
  const std::string data = encode_raster(map, type);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

FeatureMap read_raster(const std::filesystem::path& path, RasterType* type) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_raster(data, type);
}

SyntheticScene parse_scene(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
  SyntheticScene s;
  try {
    s.height = j.value("height", s.height);
    s.width = j.value("width", s.width);
    s.downsample = j.value("downsample", s.downsample);
    s.d_sdf = j.value("d_sdf", s.d_sdf);
    s.d_tex = j.value("d_tex", s.d_tex);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.threshold = j.value("threshold", s.threshold);
    s.seed = j.value("seed", s.seed);
    for (const auto& o : j.value("objects", json::array())) {
      PlantedObject p;
      const auto center = o.at("center").get<std::vector<int>>();
      const auto bbox = o.at("bbox").get<std::vector<double>>();
      if (center.size() != 2 || bbox.size() != 2) throw ConfigError("scene: center and bbox need two values");
      p.center = {center[0], center[1], bbox[0], bbox[1]};
      p.shape_code = o.value("shape_code", std::vector<double>(static_cast<std::size_t>(s.d_sdf), 0.0));
      p.texture_code = o.value("texture_code", std::vector<double>(static_cast<std::size_t>(s.d_tex), 0.0));
      if (o.contains("pose")) {
        const auto pose = o.at("pose").get<std::vector<double>>();
        if (pose.size() != 13) throw ConfigError("scene: pose needs 13 values");
        std::copy(pose.begin(), pose.end(), p.pose_raw.begin());
      }
      if (p.shape_code.size() != static_cast<std::size_t>(s.d_sdf) ||
          p.texture_code.size() != static_cast<std::size_t>(s.d_tex))
        throw ConfigError("scene: code length does not match d_sdf / d_tex");
      s.objects.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
  if (s.height <= 0 || s.width <= 0 || s.downsample <= 0 || s.map_height() == 0 || s.map_width() == 0)
    throw ConfigError("scene: image dimensions must cover at least one heatmap pixel");
  if (s.d_sdf < 0 || s.d_tex < 0 || s.noise_sigma < 0.0) throw ConfigError("scene: negative code size or noise");
  if (!(s.threshold > 0.0 && s.threshold < 1.0)) throw ConfigError("scene: threshold must lie in (0, 1)");
  for (const auto& o : s.objects) check_target_center(o.center, s.map_height(), s.map_width());
  return s;
}

SyntheticScene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scene file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str());
}

std::string dump_scene(const SyntheticScene& s) {
  json j;
  j["height"] = s.height;
  j["width"] = s.width;
  j["downsample"] = s.downsample;
  j["d_sdf"] = s.d_sdf;
  j["d_tex"] = s.d_tex;
  j["noise_sigma"] = s.noise_sigma;
  j["threshold"] = s.threshold;
  j["seed"] = s.seed;
  j["objects"] = json::array();
  for (const auto& o : s.objects) {
    j["objects"].push_back({{"center", {o.center.x, o.center.y}},
                            {"bbox", {o.center.bbox_width, o.center.bbox_height}},
                            {"shape_code", o.shape_code},
                            {"texture_code", o.texture_code},
                            {"pose", o.pose_raw}});
  }
  return j.dump(2) + "\n";
}

SyntheticScene random_scene(int objects, std::uint64_t seed, double noise_sigma) {
  if (objects < 0) throw ConfigError("random_scene: object count must be non-negative");
  SyntheticScene s;
  s.seed = seed;
  s.noise_sigma = noise_sigma;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(60.0, 160.0);
  std::normal_distribution<double> n01;
  const int mh = s.map_height(), mw = s.map_width();
  constexpr int kMargin = 2;
  std::uniform_int_distribution<int> px(kMargin, mw - 1 - kMargin), py(kMargin, mh - 1 - kMargin);
  for (int i = 0; i < objects; ++i) {
    PlantedObject p;
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      p.center = {px(rng), py(rng), box(rng), box(rng)};
      const double sigma = splat_sigma(p.center.bbox_width, p.center.bbox_height, s.downsample);
      placed = true;
      for (const auto& q : s.objects) {
        const double sq = splat_sigma(q.center.bbox_width, q.center.bbox_height, s.downsample);
        if (std::hypot(p.center.x - q.center.x, p.center.y - q.center.y) < 3.0 * std::max(sigma, sq)) {
          placed = false;
          break;
        }
      }
    }
    if (!placed) throw ConfigError("random_scene: cannot place objects with the required separation");
    p.shape_code.resize(static_cast<std::size_t>(s.d_sdf));
    p.texture_code.resize(static_cast<std::size_t>(s.d_tex));
    for (double& v : p.shape_code) v = n01(rng);
    for (double& v : p.texture_code) v = n01(rng);
    const Vec3 axis = Vec3(n01(rng), n01(rng), n01(rng)).normalized();
    const Mat3 r = axis_rotation(axis, std::uniform_real_distribution<double>(0.0, 3.14159)(rng));
    for (int k = 0; k < 9; ++k) p.pose_raw[static_cast<std::size_t>(k)] = r(k / 3, k % 3);
    p.pose_raw[9] = 0.3 * n01(rng);
    p.pose_raw[10] = 0.3 * n01(rng);
    p.pose_raw[11] = 1.5 + 0.3 * n01(rng);
    p.pose_raw[12] = std::uniform_real_distribution<double>(0.1, 0.4)(rng);
    s.objects.push_back(std::move(p));
  }
  return s;
}

SceneMaps render_scene_maps(const SyntheticScene& scene) {
  const int mh = scene.map_height(), mw = scene.map_width();
  std::vector<CenterTarget> targets;
  for (const auto& o : scene.objects) targets.push_back(o.center);
  SceneMaps maps;
  maps.heatmap = splat_targets(targets, mh, mw, scene.downsample);
  if (scene.noise_sigma > 0.0) {
    std::mt19937_64 rng(scene.seed ^ 0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> noise(0.0, scene.noise_sigma);
    for (double& v : maps.heatmap.data) v = std::max(v + noise(rng), 0.0);
  }
  maps.codes.shape = FeatureMap(mh, mw, scene.d_sdf);
  maps.codes.texture = FeatureMap(mh, mw, scene.d_tex);
  maps.codes.pose = FeatureMap(mh, mw, 13);
  if (scene.objects.empty()) return maps;
  std::vector<double> sigmas;
  for (const auto& o : scene.objects) sigmas.push_back(splat_sigma(o.center.bbox_width, o.center.bbox_height, scene.downsample));
  for (int y = 0; y < mh; ++y)
    for (int x = 0; x < mw; ++x) {
      std::size_t owner = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < scene.objects.size(); ++i) {
        const double e = splat_exponent(scene.objects[i].center, sigmas[i], x, y);
        if (e < best) {
          best = e;
          owner = i;
        }
      }
      const auto& o = scene.objects[owner];
      for (int c = 0; c < scene.d_sdf; ++c) maps.codes.shape.at(y, x, c) = o.shape_code[static_cast<std::size_t>(c)];
      for (int c = 0; c < scene.d_tex; ++c) maps.codes.texture.at(y, x, c) = o.texture_code[static_cast<std::size_t>(c)];
      for (int c = 0; c < 13; ++c) maps.codes.pose.at(y, x, c) = o.pose_raw[static_cast<std::size_t>(c)];
    }
  return maps;
}

std::string DetectionReport::to_csv() const {
  std::ostringstream os;
  os << "planted,detected,x,y,score,center_error,code_error,rotation_error\n";
  char buf[256];
  for (const auto& m : matches) {
    if (m.detected < 0) {
      std::snprintf(buf, sizeof buf, "%d,-1,,,,,,\n", m.planted);
    } else {
      const auto& d = detections[static_cast<std::size_t>(m.detected)];
      std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%.9g,%.9g,%.9g,%.9g\n", m.planted, m.detected, d.x, d.y, d.score,
                    m.center_error, m.code_error, m.rotation_error);
    }
    os << buf;
  }
  return os.str();
}

DetectionReport run_detection(const SyntheticScene& scene, double tolerance) {
  const SceneMaps maps = render_scene_maps(scene);
  const std::vector<Peak> peaks = detect_peaks(maps.heatmap, scene.threshold);
  DetectionReport report;
  report.detections = sample_codes(maps.codes, peaks);
  report.planted = static_cast<int>(scene.objects.size());
  report.matches.resize(scene.objects.size());
  std::vector<bool> taken(scene.objects.size(), false);
  for (std::size_t i = 0; i < scene.objects.size(); ++i) report.matches[i].planted = static_cast<int>(i);
  for (std::size_t d = 0; d < report.detections.size(); ++d) {
    const auto& det = report.detections[d];
    int best = -1;
    double best_dist = tolerance;
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
      if (taken[i]) continue;
      const double dist = std::hypot(det.x - scene.objects[i].center.x, det.y - scene.objects[i].center.y);
      if (dist <= best_dist) {
        best_dist = dist;
        best = static_cast<int>(i);
      }
    }
    if (best < 0) continue;
    const auto& planted = scene.objects[static_cast<std::size_t>(best)];
    taken[static_cast<std::size_t>(best)] = true;
    DetectionMatch& m = report.matches[static_cast<std::size_t>(best)];
    m.detected = static_cast<int>(d);
    m.center_error = best_dist;
    double err = 0.0;
    for (int c = 0; c < det.shape_code.size(); ++c) err = std::max(err, std::abs(det.shape_code[c] - planted.shape_code[static_cast<std::size_t>(c)]));
    for (int c = 0; c < det.texture_code.size(); ++c) err = std::max(err, std::abs(det.texture_code[c] - planted.texture_code[static_cast<std::size_t>(c)]));
    m.code_error = err;
    m.rotation_error = rotation_angle(det.pose.rotation, pose_from_raw(planted.pose_raw).rotation);
    ++report.recovered;
  }
  return report;
}

}  // namespace osdf
