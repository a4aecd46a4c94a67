// Copyright 2026 The chanprune Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nncore/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "common/error.hpp"
#include "common/fileio.hpp"

namespace chanprune::nn {

namespace {

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  std::uint64_t offset() const { return pos_; }
  void need(std::size_t n, const char* what) const {
    if (in_.size() - pos_ < n) throw FormatError(std::string("checkpoint truncated in ") + what, pos_);
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  std::string_view bytes(std::size_t n, const char* what) {
    need(n, what);
    auto v = in_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

struct TensorRef {
  const std::string* name;
  const std::vector<int>* shape;
  std::vector<float>* value;
};

std::vector<TensorRef> tensors_of(Network<float>& net) {
  std::vector<TensorRef> refs;
  for (auto* p : net.params()) refs.push_back({&p->name, &p->shape, &p->value});
  for (auto* b : net.buffers()) refs.push_back({&b->name, &b->shape, &b->value});
  return refs;
}

}  // namespace

std::string encode_checkpoint(Network<float>& net) {
  Writer w;
  w.bytes(kCheckpointMagic, 4);
  w.u32(kCheckpointVersion);
  w.u64(net.arch().fingerprint());
  const auto refs = tensors_of(net);
  w.u32(static_cast<std::uint32_t>(refs.size()));
  for (const auto& t : refs) {
    w.u32(static_cast<std::uint32_t>(t.name->size()));
    w.bytes(t.name->data(), t.name->size());
    w.u32(static_cast<std::uint32_t>(t.shape->size()));
    for (int d : *t.shape) w.u32(static_cast<std::uint32_t>(d));
    w.u64(t.value->size());
    for (float v : *t.value) w.f32(v);
  }
  return w.take();
}

void decode_checkpoint(Network<float>& net, std::string_view bytes) {
  Reader r(bytes);
  if (r.bytes(4, "magic") != std::string_view(kCheckpointMagic, 4))
    throw FormatError("not a checkpoint (bad magic)", 0);
  const std::uint64_t version_at = r.offset();
  if (r.u32("version") != kCheckpointVersion) throw FormatError("unsupported checkpoint version", version_at);
  const std::uint64_t hash_at = r.offset();
  if (r.u64("fingerprint") != net.arch().fingerprint())
    throw FormatError("checkpoint was written for a different architecture", hash_at);
  auto refs = tensors_of(net);
  const std::uint64_t count_at = r.offset();
  if (r.u32("tensor count") != refs.size())
    throw FormatError("checkpoint tensor count does not match the model", count_at);
  // Decode into scratch first so a failure leaves the model untouched.
  std::vector<std::vector<float>> staged(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& t = refs[i];
    const std::uint32_t name_len = r.u32("name length");
    const std::string_view name = r.bytes(name_len, "name");
    if (name != *t.name)
      throw StructuralError("checkpoint tensor '" + std::string(name) + "' where '" + *t.name +
                            "' was expected");
    const std::uint32_t rank = r.u32("rank");
    if (rank != t.shape->size()) throw StructuralError("rank mismatch for " + *t.name);
    for (std::uint32_t d = 0; d < rank; ++d)
      if (r.u32("dims") != static_cast<std::uint32_t>((*t.shape)[d]))
        throw StructuralError("shape mismatch for " + *t.name);
    const std::uint64_t n = r.u64("element count");
    if (n != t.value->size()) throw StructuralError("element count mismatch for " + *t.name);
    r.need(n * 4, "values");
    staged[i].resize(n);
    for (std::uint64_t k = 0; k < n; ++k) staged[i][k] = r.f32("values");
  }
  if (!r.done()) throw FormatError("trailing bytes after checkpoint payload", r.offset());
  for (std::size_t i = 0; i < refs.size(); ++i) *refs[i].value = std::move(staged[i]);
}

void save_checkpoint(Network<float>& net, const std::filesystem::path& path) {
  write_file_atomic(path, encode_checkpoint(net));
}

void load_checkpoint(Network<float>& net, const std::filesystem::path& path) {
  decode_checkpoint(net, read_file(path));
}

}  // namespace chanprune::nn
