// Copyright 2026 The CramNet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CRAMNET_KERNELS_ACTIVATION_H_
#define CRAMNET_KERNELS_ACTIVATION_H_

#include <cstddef>
#include <span>
#include <vector>

namespace cramnet::kernels {

// Read-only view of a column-major activation block: `rows` features by
// `batch` samples, sample b occupying data[b * rows, (b + 1) * rows).
struct ConstActivationView {
  std::size_t rows = 0;
  std::size_t batch = 0;
  std::span<const float> data;

  float at(std::size_t r, std::size_t b) const { return data[b * rows + r]; }
  std::span<const float> column(std::size_t b) const {
    return data.subspan(b * rows, rows);
  }
  // Samples [first, first + count).
  ConstActivationView columns(std::size_t first, std::size_t count) const {
    return {rows, count, data.subspan(first * rows, count * rows)};
  }
};

struct ActivationView {
  std::size_t rows = 0;
  std::size_t batch = 0;
  std::span<float> data;

  float& at(std::size_t r, std::size_t b) const { return data[b * rows + r]; }
  std::span<float> column(std::size_t b) const {
    return data.subspan(b * rows, rows);
  }
  ActivationView columns(std::size_t first, std::size_t count) const {
    return {rows, count, data.subspan(first * rows, count * rows)};
  }
  operator ConstActivationView() const { return {rows, batch, data}; }
};

// Owning column-major activation matrix.
struct ActivationMatrix {
  std::size_t rows = 0;
  std::size_t batch = 0;
  std::vector<float> data;

  ActivationMatrix() = default;
  ActivationMatrix(std::size_t r, std::size_t b)
      : rows(r), batch(b), data(r * b, 0.0f) {}

  float& at(std::size_t r, std::size_t b) { return data[b * rows + r]; }
  float at(std::size_t r, std::size_t b) const { return data[b * rows + r]; }

  ConstActivationView view() const { return {rows, batch, data}; }
  ActivationView mutable_view() { return {rows, batch, data}; }
  operator ConstActivationView() const { return view(); }

  std::size_t bytes() const { return data.size() * sizeof(float); }

  bool operator==(const ActivationMatrix&) const = default;
};

}  // namespace cramnet::kernels

#endif  // CRAMNET_KERNELS_ACTIVATION_H_
