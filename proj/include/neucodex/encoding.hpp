#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "neucodex/rng.hpp"
#include "neucodex/tensor.hpp"

namespace neucodex {

// C x H x W pixel intensities in [0,1].
struct StaticImage {
    Shape shape;
    std::vector<float> pixels;

    StaticImage(Shape s, std::vector<float> p);
    void validate() const; // pixels in [0,1]
};

struct Event {
    int64_t t_us = 0;
    uint16_t x = 0, y = 0;
    uint8_t polarity = 0;
};

// Time-sorted DVS-style events over a (width x height) sensor. When
// t_end_us > t_start_us the recording window is explicit and binning covers
// [t_start_us, t_end_us); otherwise the window is derived from the events.
struct EventStream {
    uint16_t width = 0, height = 0;
    int64_t t_start_us = 0, t_end_us = 0;
    std::vector<Event> events;
};

using SampleInput = std::variant<StaticImage, EventStream>;

// Bernoulli rate coding: each pixel fires independently with probability
// equal to its intensity, on a stream derived from (seed, t) so the same
// seed and timestep always reproduce the same spikes.
SpikeTensor rate_encode(const StaticImage &img, uint32_t t, uint64_t seed);

// Divides the event time range into t_max equal-duration bins; the
// (polarity, y, x) cell of bin b is 1 iff at least one event lands in it.
// Output frames have shape (2, height, width). Empty stream -> all-zero
// frames; unsorted events -> FormatError.
std::vector<SpikeTensor> event_bin(const EventStream &ev, uint32_t t_max);

// "t_us x y polarity" per line; '#' starts a comment. Sensor extent is
// taken from the expected width/height and validated against every event.
EventStream load_event_file(const std::string &path, uint16_t width,
                            uint16_t height);

// Seeded synthetic inputs for the harness.
StaticImage synthetic_image(const Shape &shape, uint64_t seed, uint64_t sample_id);
EventStream synthetic_events(uint16_t width, uint16_t height, uint64_t seed,
                             uint64_t sample_id);

} // namespace neucodex
