#include "neucodex/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace neucodex {

StaticImage::StaticImage(Shape s, std::vector<float> p)
    : shape(std::move(s)), pixels(std::move(p)) {
    if (pixels.size() != shape.elements())
        throw DomainError("StaticImage: pixel count does not match shape");
}

void StaticImage::validate() const {
    for (float v : pixels) {
        if (!(v >= 0.0f && v <= 1.0f))
            throw DomainError("StaticImage: pixel value outside [0,1]");
    }
}

SpikeTensor rate_encode(const StaticImage &img, uint32_t t, uint64_t seed) {
    img.validate();
    SplitMix64 rng(derive_seed(seed, 0x726174656E63ULL ^ t)); // per-timestep stream
    std::vector<uint8_t> spikes(img.pixels.size());
    for (size_t i = 0; i < img.pixels.size(); ++i)
        spikes[i] = rng.next_double() < img.pixels[i] ? 1 : 0;
    return SpikeTensor::from_values(img.shape, spikes);
}

std::vector<SpikeTensor> event_bin(const EventStream &ev, uint32_t t_max) {
    if (t_max < 1)
        throw DomainError("event_bin: t_max must be >= 1");
    const Shape frame_shape({2, ev.height, ev.width});
    std::vector<std::vector<uint8_t>> frames(
        t_max, std::vector<uint8_t>(frame_shape.elements(), 0));

    if (!ev.events.empty()) {
        for (size_t i = 1; i < ev.events.size(); ++i)
            if (ev.events[i].t_us < ev.events[i - 1].t_us)
                throw FormatError("event_bin: events not time-sorted at index " +
                                  std::to_string(i));
        // Explicit recording window when given, else the events' own range.
        int64_t base, span;
        if (ev.t_end_us > ev.t_start_us) {
            base = ev.t_start_us;
            span = ev.t_end_us - ev.t_start_us;
        } else {
            base = ev.events.front().t_us;
            span = ev.events.back().t_us - base + 1;
        }
        for (const Event &e : ev.events) {
            if (e.x >= ev.width || e.y >= ev.height || e.polarity > 1)
                throw DomainError("event_bin: event outside sensor extent");
            if (e.t_us < base || e.t_us >= base + span)
                throw DomainError("event_bin: event outside the recording window");
            const uint64_t b =
                static_cast<uint64_t>(e.t_us - base) * t_max / static_cast<uint64_t>(span);
            frames[b][(static_cast<size_t>(e.polarity) * ev.height + e.y) * ev.width +
                      e.x] = 1;
        }
    }

    std::vector<SpikeTensor> out;
    out.reserve(t_max);
    for (auto &f : frames)
        out.push_back(SpikeTensor::from_values(frame_shape, f));
    return out;
}

EventStream load_event_file(const std::string &path, uint16_t width,
                            uint16_t height) {
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot open event file " + path);
    EventStream ev;
    ev.width = width;
    ev.height = height;
    std::string line;
    size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos)
            line.resize(hash);
        std::istringstream is(line);
        Event e;
        int64_t t;
        long x, y;
        int pol;
        if (!(is >> t >> x >> y >> pol)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue; // blank/comment line
            throw FormatError(path + ":" + std::to_string(lineno) +
                              ": expected 't_us x y polarity'");
        }
        if (x < 0 || x >= width || y < 0 || y >= height || (pol != 0 && pol != 1))
            throw FormatError(path + ":" + std::to_string(lineno) +
                              ": event outside sensor extent");
        e.t_us = t;
        e.x = static_cast<uint16_t>(x);
        e.y = static_cast<uint16_t>(y);
        e.polarity = static_cast<uint8_t>(pol);
        ev.events.push_back(e);
    }
    for (size_t i = 1; i < ev.events.size(); ++i)
        if (ev.events[i].t_us < ev.events[i - 1].t_us)
            throw FormatError(path + ": events not time-sorted");
    return ev;
}

StaticImage synthetic_image(const Shape &shape, uint64_t seed, uint64_t sample_id) {
    SplitMix64 rng(derive_seed(derive_seed(seed, "image"), sample_id));
    std::vector<float> px(shape.elements());
    for (float &v : px)
        v = rng.next_float();
    return StaticImage(shape, std::move(px));
}

EventStream synthetic_events(uint16_t width, uint16_t height, uint64_t seed,
                             uint64_t sample_id) {
    SplitMix64 rng(derive_seed(derive_seed(seed, "events"), sample_id));
    EventStream ev;
    ev.width = width;
    ev.height = height;
    ev.t_start_us = 0;
    ev.t_end_us = 100000; // 100 ms window
    const size_t n = 256 + rng.next() % 768;
    std::vector<int64_t> times(n);
    for (auto &t : times)
        t = static_cast<int64_t>(rng.next() % 100000);
    std::sort(times.begin(), times.end());
    ev.events.reserve(n);
    for (int64_t t : times) {
        Event e;
        e.t_us = t;
        e.x = static_cast<uint16_t>(rng.next() % width);
        e.y = static_cast<uint16_t>(rng.next() % height);
        e.polarity = static_cast<uint8_t>(rng.next() & 1);
        ev.events.push_back(e);
    }
    return ev;
}

} // namespace neucodex
