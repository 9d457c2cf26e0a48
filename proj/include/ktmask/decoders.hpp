#pragma once

// Reconstruction decoders behind a common registry: zero-fill (adjoint) and
// iterative soft-thresholding (IST). Both are pure functions of the
// measurements and parameters, so repeated decodes are bit-identical.

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ktmask/core.hpp"
#include "ktmask/transform.hpp"

namespace ktmask {

struct DecoderSpec {
    std::string id;
    std::map<std::string, double> params;

    double get(const std::string& key, double fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }

    // Checks the canonical parameter ranges for whichever keys are present.
    void validate() const {
        if (id.empty()) throw std::invalid_argument("DecoderSpec: empty id");
        if (auto it = params.find("lambda"); it != params.end() && !(it->second >= 0.0))
            throw std::invalid_argument("DecoderSpec: lambda must be >= 0");
        if (auto it = params.find("iters"); it != params.end() && !(it->second >= 1.0))
            throw std::invalid_argument("DecoderSpec: iters must be >= 1");
        if (auto it = params.find("step"); it != params.end() && !(it->second > 0.0 && it->second <= 1.0))
            throw std::invalid_argument("DecoderSpec: step must be in (0, 1]");
        if (auto it = params.find("tol"); it != params.end() && !(it->second >= 0.0))
            throw std::invalid_argument("DecoderSpec: tol must be >= 0");
    }
};

// "id key=value key=value" with keys in sorted order; %.17g keeps doubles
// exact through a round trip.
inline std::string serialize(const DecoderSpec& spec) {
    std::string out = spec.id;
    char buf[64];
    for (const auto& [key, value] : spec.params) {
        std::snprintf(buf, sizeof buf, "%.17g", value);
        out += " " + key + "=" + buf;
    }
    return out;
}

inline DecoderSpec parse_decoder_spec(const std::string& text) {
    DecoderSpec spec;
    std::size_t pos = 0;
    auto next_token = [&]() -> std::string {
        while (pos < text.size() && text[pos] == ' ') ++pos;
        std::size_t start = pos;
        while (pos < text.size() && text[pos] != ' ') ++pos;
        return text.substr(start, pos - start);
    };
    spec.id = next_token();
    if (spec.id.empty()) throw std::invalid_argument("DecoderSpec: empty id");
    for (std::string tok = next_token(); !tok.empty(); tok = next_token()) {
        const auto eq = tok.find('=');
        const auto malformed = std::invalid_argument("DecoderSpec: malformed parameter '" + tok + "'");
        if (eq == std::string::npos || eq == 0) throw malformed;
        double value = 0.0;
        std::size_t used = 0;
        try {
            value = std::stod(tok.substr(eq + 1), &used);
        } catch (const std::exception&) {
            throw malformed;
        }
        if (used != tok.size() - eq - 1) throw malformed;
        spec.params[tok.substr(0, eq)] = value;
    }
    spec.validate();
    return spec;
}

// ---------------------------------------------------------------------------
// Zero-fill
// ---------------------------------------------------------------------------

inline DynamicImage decode_zero_fill(const Measurements& b) { return adjoint_sample(b); }

// ---------------------------------------------------------------------------
// IST
// ---------------------------------------------------------------------------

struct IstResult {
    DynamicImage image;
    // objectives[j] = F(x_j); x_0 is the zero-fill start, one entry per update
    std::vector<double> objectives;
    int iterations = 0;
};

// Proximal gradient on F(x) = 1/2 ||P Psi x - b||^2 + lambda ||Phi x||_1:
// gradient step on the data term, then magnitude soft-thresholding in the
// temporal-frequency domain (phase preserved). The acquisition operator has
// unit norm, so any step <= 1 keeps F non-increasing.
inline IstResult decode_ist(const Measurements& b, const DecoderSpec& spec) {
    b.validate();
    spec.validate();
    if (b.mask.lines.empty()) throw std::invalid_argument("no measurements");

    const double lambda = spec.get("lambda", 1e-3);
    const int iters = static_cast<int>(std::llround(spec.get("iters", 200.0)));
    const double step = spec.get("step", 1.0);
    const double tol = spec.get("tol", 1e-6);
    const double shrink = lambda * step;

    IstResult res;
    res.image = decode_zero_fill(b);

    auto l1_of = [&](const DynamicImage& u) {
        double s = 0.0;
        for (const auto& v : u.data) s += std::abs(v);
        return lambda * s;
    };
    // 1/2 ||P Psi x - b||^2 plus the residual itself, reused for the gradient
    auto data_term = [&](const DynamicImage& x, std::vector<cplx>& residual) {
        const KSpaceVolume k = forward_fft(x);
        const Measurements got = sample_kspace(k, b.mask);
        residual.resize(got.values.size());
        double s = 0.0;
        for (std::size_t i = 0; i < got.values.size(); ++i) {
            residual[i] = got.values[i] - b.values[i];
            s += std::norm(residual[i]);
        }
        return 0.5 * s;
    };

    std::vector<cplx> residual;
    double l1 = l1_of(temporal_fft(res.image));
    res.objectives.push_back(data_term(res.image, residual) + l1);

    for (int it = 0; it < iters; ++it) {
        // x <- x - step * Psi* P^T residual
        const DynamicImage grad = adjoint_sample(Measurements{b.mask, residual});
        DynamicImage y = res.image;
        for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] -= step * grad.data[i];

        DynamicImage u = temporal_fft(y);
        double l1_new = 0.0;
        for (auto& v : u.data) {
            const double mag = std::abs(v);
            if (mag <= shrink) {
                v = cplx{};
            } else {
                v *= (mag - shrink) / mag;
                l1_new += mag - shrink;
            }
        }
        res.image = temporal_ifft(u);
        l1 = lambda * l1_new;

        const double obj = data_term(res.image, residual) + l1;
        const double prev = res.objectives.back();
        res.objectives.push_back(obj);
        res.iterations = it + 1;
        const double rel_drop = (prev - obj) / std::max(std::abs(prev), 1e-300);
        if (rel_drop < tol) break;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

enum class DecoderKind { ZeroFill, Ist };

// The id prefix selects the algorithm, so configs can register variants like
// "ist-strong" with their own parameters.
inline DecoderKind kind_from_id(const std::string& id) {
    if (id.rfind("zf", 0) == 0 || id.rfind("zero", 0) == 0) return DecoderKind::ZeroFill;
    if (id.rfind("ist", 0) == 0) return DecoderKind::Ist;
    throw std::invalid_argument("unknown decoder kind for id: " + id);
}

struct Decoder {
    DecoderSpec spec;
    DecoderKind kind = DecoderKind::ZeroFill;

    DynamicImage decode(const Measurements& b) const {
        if (kind == DecoderKind::ZeroFill) return decode_zero_fill(b);
        return decode_ist(b, spec).image;
    }
};

class DecoderRegistry {
public:
    const Decoder& register_decoder(const DecoderSpec& spec) {
        spec.validate();
        auto [it, inserted] = entries_.try_emplace(spec.id, Decoder{spec, kind_from_id(spec.id)});
        if (!inserted) throw std::invalid_argument("duplicate decoder id: " + spec.id);
        return it->second;
    }

    const Decoder& lookup(const std::string& id) const {
        auto it = entries_.find(id);
        if (it == entries_.end()) throw std::invalid_argument("unknown decoder: " + id);
        return it->second;
    }

    bool contains(const std::string& id) const { return entries_.count(id) != 0; }

    std::vector<std::string> ids() const {
        std::vector<std::string> out;
        for (const auto& [id, dec] : entries_) out.push_back(id);
        return out;
    }

private:
    std::map<std::string, Decoder> entries_;
};

inline DecoderRegistry make_default_registry() {
    DecoderRegistry reg;
    reg.register_decoder({"zf", {}});
    reg.register_decoder({"ist", {{"lambda", 1e-3}, {"iters", 200.0}, {"step", 1.0}, {"tol", 1e-6}}});
    return reg;
}

} // namespace ktmask
