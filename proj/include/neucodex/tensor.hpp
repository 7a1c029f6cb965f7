#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "neucodex/errors.hpp"

namespace neucodex {

// Ordered list of positive extents, row-major (last dimension fastest).
class Shape {
  public:
    Shape() = default;
    explicit Shape(std::vector<uint32_t> dims);

    size_t rank() const { return dims_.size(); }
    uint32_t operator[](size_t i) const { return dims_[i]; }
    const std::vector<uint32_t> &dims() const { return dims_; }
    uint64_t elements() const { return elements_; }

    bool operator==(const Shape &other) const { return dims_ == other.dims_; }
    std::string to_string() const; // "(512,4,4)"

  private:
    std::vector<uint32_t> dims_;
    uint64_t elements_ = 0;
};

// 32-bit real tensor, row-major.
struct DenseTensor {
    Shape shape;
    std::vector<float> data;

    DenseTensor() = default;
    DenseTensor(Shape s, std::vector<float> values);
    static DenseTensor zeros(const Shape &s);
    static DenseTensor full(const Shape &s, float value);

    uint64_t elements() const { return shape.elements(); }
    // Throws DomainError on NaN/Inf.
    void check_finite(const char *context) const;
};

// Packs binary values, MSB-first within each byte, trailing pad bits zero.
// Throws DomainError if any input value is not 0 or 1.
std::vector<uint8_t> pack_bits(std::span<const uint8_t> bits);

// Exact inverse of pack_bits on the first n bits. Throws FormatError on a
// length mismatch or a nonzero pad bit (signals corruption).
std::vector<uint8_t> unpack_bits(std::span<const uint8_t> bytes, size_t n);

// Binary activation tensor stored bit-packed per pack_bits. The packed bytes
// are the wire representation, so the layout here is a bit-exact contract.
class SpikeTensor {
  public:
    SpikeTensor() = default;

    // values must be 0/1, one per element.
    static SpikeTensor from_values(Shape s, std::span<const uint8_t> values);
    // bytes must already satisfy the packed layout (pad bits zero).
    static SpikeTensor from_packed(Shape s, std::vector<uint8_t> bytes);
    static SpikeTensor zeros(const Shape &s);

    const Shape &shape() const { return shape_; }
    uint64_t elements() const { return shape_.elements(); }
    const std::vector<uint8_t> &packed() const { return bits_; }

    bool get(uint64_t i) const {
        return (bits_[i >> 3] >> (7 - (i & 7))) & 1u;
    }
    std::vector<uint8_t> values() const; // unpacked 0/1 bytes
    DenseTensor to_dense() const;
    uint64_t ones() const;

    bool operator==(const SpikeTensor &other) const {
        return shape_ == other.shape_ && bits_ == other.bits_;
    }

  private:
    Shape shape_;
    std::vector<uint8_t> bits_;
};

// (number of 1-bits) / (element count). Throws DomainError on empty input.
double firing_rate(const SpikeTensor &x);

// Fraction of nonzero elements; coincides with firing_rate on binary data.
// Used by the energy model to measure per-layer input activity.
double activity_fraction(const DenseTensor &x);

} // namespace neucodex
