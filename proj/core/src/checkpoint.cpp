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

#include "osdf/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace osdf {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void i32(std::int32_t v) { raw(&v, sizeof v); }
  void f32(float v) { raw(&v, sizeof v); }
  void bytes(const char* s, std::size_t n) { raw(s, n); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}
  std::uint32_t u32() { return read<std::uint32_t>(); }
  std::int32_t i32() { return read<std::int32_t>(); }
  float f32() { return read<float>(); }
  void expect(const char* tag, std::size_t n) {
    need(n);
    if (std::memcmp(in_.data() + pos_, tag, n) != 0) throw FormatError("checkpoint: bad magic");
    pos_ += n;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  template <typename V>
  V read() {
    need(sizeof(V));
    V v;
    std::memcpy(&v, in_.data() + pos_, sizeof(V));
    pos_ += sizeof(V);
    return v;
  }
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw FormatError("checkpoint: truncated file");
  }
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

void write_network(Writer& w, const FieldNetwork& net) {
  w.u32(static_cast<std::uint32_t>(net.kind()));
  w.u32(static_cast<std::uint32_t>(net.layers().size()));
  w.f32(net.omega0());
  for (const auto& l : net.layers()) {
    w.u32(static_cast<std::uint32_t>(l.weight.rows()));
    w.u32(static_cast<std::uint32_t>(l.weight.cols()));
    w.u32(static_cast<std::uint32_t>(l.activation));
  }
  for (const auto& l : net.layers()) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.f32(l.weight(r, c));
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) w.f32(l.bias[r]);
  }
}

FieldNetwork read_network(Reader& r, int d_sdf, int d_tex) {
  const auto kind = r.u32();
  if (kind > 1) throw FormatError("checkpoint: unknown network kind");
  const auto layer_count = r.u32();
  if (layer_count == 0 || layer_count > 1024) throw FormatError("checkpoint: implausible layer count");
  const float omega0 = r.f32();
  std::vector<DenseLayer<float>> layers(layer_count);
  for (auto& l : layers) {
    const auto rows = r.u32();
    const auto cols = r.u32();
    const auto act = r.u32();
    if (rows == 0 || cols == 0 || rows > (1u << 16) || cols > (1u << 16))
      throw FormatError("checkpoint: implausible layer shape");
    if (act > 2) throw FormatError("checkpoint: unknown activation");
    l.weight.resize(rows, cols);
    l.bias.resize(rows);
    l.activation = static_cast<Activation>(act);
  }
  for (auto& l : layers) {
    for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
      for (Eigen::Index j = 0; j < l.weight.cols(); ++j) l.weight(i, j) = r.f32();
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = r.f32();
  }
  const auto fk = static_cast<FieldKind>(kind);
  try {
    return FieldNetwork(fk, d_sdf, fk == FieldKind::kTexture ? d_tex : 0, omega0, std::move(layers));
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint) {
  const auto& table = checkpoint.latents;
  checkpoint.shape.validate();
  if (checkpoint.shape.kind() != FieldKind::kSdf) throw ConfigError("checkpoint shape network must be an SDF network");
  if (checkpoint.shape.d_sdf() != table.d_sdf) throw ConfigError("checkpoint: latent table d_sdf mismatch");
  Writer w;
  w.bytes("OSDF", 4);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(table.d_sdf));
  w.u32(static_cast<std::uint32_t>(table.d_tex));
  w.u32(checkpoint.texture ? 2u : 1u);
  write_network(w, checkpoint.shape);
  if (checkpoint.texture) write_network(w, *checkpoint.texture);
  w.u32(static_cast<std::uint32_t>(table.codes.size()));
  w.u32(static_cast<std::uint32_t>(table.d_sdf));
  w.u32(static_cast<std::uint32_t>(table.d_tex));
  for (const auto& c : table.codes) {
    if (c.shape.size() != table.d_sdf || c.texture.size() != table.d_tex)
      throw ConfigError("checkpoint: latent code dimension mismatch");
    w.i32(c.category);
    for (Eigen::Index i = 0; i < c.shape.size(); ++i) w.f32(c.shape[i]);
    for (Eigen::Index i = 0; i < c.texture.size(); ++i) w.f32(c.texture[i]);
  }
  return w.take();
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  r.expect("OSDF", 4);
  if (r.u32() != kCheckpointVersion) throw FormatError("checkpoint: unsupported version");
  const int d_sdf = static_cast<int>(r.u32());
  const int d_tex = static_cast<int>(r.u32());
  const auto net_count = r.u32();
  if (net_count < 1 || net_count > 2) throw FormatError("checkpoint: expected one or two networks");
  Checkpoint ck;
  ck.shape = read_network(r, d_sdf, d_tex);
  if (ck.shape.kind() != FieldKind::kSdf) throw FormatError("checkpoint: first network must be the SDF network");
  if (net_count == 2) {
    ck.texture = read_network(r, d_sdf, d_tex);
    if (ck.texture->kind() != FieldKind::kTexture) throw FormatError("checkpoint: second network must be texture");
  }
  const auto count = r.u32();
  ck.latents.d_sdf = static_cast<int>(r.u32());
  ck.latents.d_tex = static_cast<int>(r.u32());
  if (ck.latents.d_sdf != d_sdf || ck.latents.d_tex != d_tex) throw FormatError("checkpoint: inconsistent dims");
  ck.latents.codes.resize(count);
  for (auto& c : ck.latents.codes) {
    c.category = r.i32();
    c.shape.resize(d_sdf);
    c.texture.resize(d_tex);
    for (int i = 0; i < d_sdf; ++i) c.shape[i] = r.f32();
    for (int i = 0; i < d_tex; ++i) c.texture[i] = r.f32();
  }
  if (!r.done()) throw FormatError("checkpoint: trailing bytes");
  return ck;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace osdf
