#include "neucodex/tensor.hpp"

#include <bit>
#include <cmath>
#include <sstream>

namespace neucodex {

Shape::Shape(std::vector<uint32_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty())
        throw DomainError("Shape: at least one extent required");
    uint64_t n = 1;
    for (uint32_t d : dims_) {
        if (d == 0)
            throw DomainError("Shape: extents must be >= 1");
        n *= d;
        if (n >= (1ULL << 32))
            throw DomainError("Shape: element count must be < 2^32");
    }
    elements_ = n;
}

std::string Shape::to_string() const {
    std::ostringstream os;
    os << '(';
    for (size_t i = 0; i < dims_.size(); ++i) {
        if (i)
            os << ',';
        os << dims_[i];
    }
    os << ')';
    return os.str();
}

DenseTensor::DenseTensor(Shape s, std::vector<float> values)
    : shape(std::move(s)), data(std::move(values)) {
    if (data.size() != shape.elements())
        throw DomainError("DenseTensor: data length " + std::to_string(data.size()) +
                          " does not match shape " + shape.to_string());
}

DenseTensor DenseTensor::zeros(const Shape &s) {
    return DenseTensor(s, std::vector<float>(s.elements(), 0.0f));
}

DenseTensor DenseTensor::full(const Shape &s, float value) {
    return DenseTensor(s, std::vector<float>(s.elements(), value));
}

void DenseTensor::check_finite(const char *context) const {
    for (float v : data) {
        if (!std::isfinite(v))
            throw DomainError(std::string(context) + ": non-finite value in tensor");
    }
}

std::vector<uint8_t> pack_bits(std::span<const uint8_t> bits) {
    std::vector<uint8_t> out((bits.size() + 7) / 8, 0);
    for (size_t i = 0; i < bits.size(); ++i) {
        uint8_t b = bits[i];
        if (b > 1)
            throw DomainError("pack_bits: value at index " + std::to_string(i) +
                              " is not 0/1");
        out[i >> 3] = static_cast<uint8_t>(out[i >> 3] | (b << (7 - (i & 7))));
    }
    return out;
}

std::vector<uint8_t> unpack_bits(std::span<const uint8_t> bytes, size_t n) {
    if (bytes.size() != (n + 7) / 8)
        throw FormatError("unpack_bits: got " + std::to_string(bytes.size()) +
                          " bytes for " + std::to_string(n) + " bits");
    if (n % 8 != 0 && !bytes.empty()) {
        const uint8_t pad_mask = static_cast<uint8_t>(0xFFu >> (n % 8));
        if (bytes.back() & pad_mask)
            throw FormatError("unpack_bits: nonzero padding bit");
    }
    std::vector<uint8_t> out(n);
    for (size_t i = 0; i < n; ++i)
        out[i] = (bytes[i >> 3] >> (7 - (i & 7))) & 1u;
    return out;
}

SpikeTensor SpikeTensor::from_values(Shape s, std::span<const uint8_t> values) {
    if (values.size() != s.elements())
        throw DomainError("SpikeTensor: value count does not match shape " +
                          s.to_string());
    SpikeTensor t;
    t.bits_ = pack_bits(values);
    t.shape_ = std::move(s);
    return t;
}

SpikeTensor SpikeTensor::from_packed(Shape s, std::vector<uint8_t> bytes) {
    const uint64_t n = s.elements();
    if (bytes.size() != (n + 7) / 8)
        throw FormatError("SpikeTensor: packed length does not match shape " +
                          s.to_string());
    if (n % 8 != 0 && !bytes.empty()) {
        const uint8_t pad_mask = static_cast<uint8_t>(0xFFu >> (n % 8));
        if (bytes.back() & pad_mask)
            throw FormatError("SpikeTensor: nonzero padding bit");
    }
    SpikeTensor t;
    t.shape_ = std::move(s);
    t.bits_ = std::move(bytes);
    return t;
}

SpikeTensor SpikeTensor::zeros(const Shape &s) {
    SpikeTensor t;
    t.shape_ = s;
    t.bits_.assign((s.elements() + 7) / 8, 0);
    return t;
}

std::vector<uint8_t> SpikeTensor::values() const {
    return unpack_bits(bits_, shape_.elements());
}

DenseTensor SpikeTensor::to_dense() const {
    DenseTensor d = DenseTensor::zeros(shape_);
    const uint64_t n = shape_.elements();
    for (uint64_t i = 0; i < n; ++i)
        d.data[i] = get(i) ? 1.0f : 0.0f;
    return d;
}

uint64_t SpikeTensor::ones() const {
    uint64_t c = 0;
    for (uint8_t b : bits_)
        c += static_cast<uint64_t>(std::popcount(b));
    return c; // pad bits are zero by invariant
}

double firing_rate(const SpikeTensor &x) {
    if (x.elements() == 0)
        throw DomainError("firing_rate: empty tensor");
    return static_cast<double>(x.ones()) / static_cast<double>(x.elements());
}

double activity_fraction(const DenseTensor &x) {
    if (x.elements() == 0)
        throw DomainError("activity_fraction: empty tensor");
    uint64_t nz = 0;
    for (float v : x.data)
        nz += (v != 0.0f);
    return static_cast<double>(nz) / static_cast<double>(x.elements());
}

} // namespace neucodex
