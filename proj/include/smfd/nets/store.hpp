// Copyright 2026 The SMFD Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "smfd/error.hpp"
#include "smfd/tensor.hpp"

namespace smfd {

// Insertion-ordered name -> tensor map.
template <typename T>
class TensorStore {
 public:
  void insert(const std::string& name, Tensor<T> t) {
    if (index_.count(name)) throw InputError("tensor store: duplicate name '" + name + "'");
    index_[name] = entries_.size();
    entries_.emplace_back(name, std::move(t));
  }

  void set(const std::string& name, Tensor<T> t) {
    if (auto it = index_.find(name); it != index_.end()) entries_[it->second].second = std::move(t);
    else insert(name, std::move(t));
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  const Tensor<T>& at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ModelError("missing tensor '" + name + "'");
    return entries_[it->second].second;
  }
  Tensor<T>& at(const std::string& name) {
    return const_cast<Tensor<T>&>(static_cast<const TensorStore&>(*this).at(name));
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t total_elements() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.second.size();
    return n;
  }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }

  template <typename U>
  TensorStore<U> cast() const {
    TensorStore<U> out;
    for (const auto& [name, t] : entries_) out.insert(name, t.template cast<U>());
    return out;
  }

  bool operator==(const TensorStore& o) const { return entries_ == o.entries_; }

 private:
  std::vector<std::pair<std::string, Tensor<T>>> entries_;
  std::map<std::string, std::size_t> index_;
};

// Weight container: "SMFDW1", u32 count, then per tensor u16 name length + UTF-8 name,
// u8 rank, rank x u32 extents, row-major f32. Everything little-endian.
namespace weights_format {

inline constexpr char kMagic[6] = {'S', 'M', 'F', 'D', 'W', '1'};

template <typename U>
void put(std::vector<std::uint8_t>& out, U v) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts need byte swapping");
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(U));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : bytes_(b) {}
  template <typename U>
  U get() {
    need(sizeof(U));
    U v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(U));
    pos_ += sizeof(U);
    return v;
  }
  std::string get_string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw ModelError("weight file truncated at byte " + std::to_string(pos_));
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace weights_format

inline std::vector<std::uint8_t> encode_weights(const TensorStore<float>& store) {
  using weights_format::put;
  std::vector<std::uint8_t> out(std::begin(weights_format::kMagic), std::end(weights_format::kMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(store.size()));
  for (const auto& [name, t] : store) {
    if (name.size() > 0xFFFF) throw InputError("tensor name too long: " + name.substr(0, 40));
    put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put<std::uint8_t>(out, static_cast<std::uint8_t>(t.rank()));
    for (int d : t.shape()) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    for (float v : t.data()) put<float>(out, v);
  }
  return out;
}

inline TensorStore<float> decode_weights(const std::vector<std::uint8_t>& bytes) {
  weights_format::Reader r(bytes);
  if (r.get_string(sizeof(weights_format::kMagic)) != std::string(weights_format::kMagic, sizeof(weights_format::kMagic)))
    throw ModelError("weight file has a bad magic header");
  const auto count = r.get<std::uint32_t>();
  TensorStore<float> store;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = r.get_string(r.get<std::uint16_t>());
    const int rank = r.get<std::uint8_t>();
    if (rank < 1 || rank > 4) throw ModelError("weight tensor '" + name + "' has rank " + std::to_string(rank));
    Shape shape;
    for (int k = 0; k < rank; ++k) {
      const auto d = r.get<std::uint32_t>();
      if (d == 0 || d > (1u << 28)) throw ModelError("weight tensor '" + name + "' has a bad extent");
      shape.push_back(static_cast<int>(d));
    }
    std::vector<float> v(shape_size(shape));
    for (float& x : v) x = r.get<float>();
    if (store.contains(name)) throw ModelError("weight file repeats tensor '" + name + "'");
    store.insert(name, Tensor<float>(shape, std::move(v)));
  }
  if (!r.done()) throw ModelError("weight file has trailing bytes");
  return store;
}

inline void save_weights(const TensorStore<float>& store, const std::string& path) {
  const auto bytes = encode_weights(store);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write weights to " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw InputError("failed writing weights to " + path);
}

inline TensorStore<float> load_weights(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open weights " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_weights(bytes);
}

}  // namespace smfd
