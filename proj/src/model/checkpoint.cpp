#include "caevpr/checkpoint.hpp"

#include "caevpr/error.hpp"

namespace caevpr {

namespace {

void write_spec(ByteWriter& w, const ArchSpec& s) {
    w.u8(static_cast<std::uint8_t>(s.backbone));
    for (int v : {s.input.c, s.input.h, s.input.w, s.d1, s.d2, s.d3}) w.u32(static_cast<std::uint32_t>(v));
    for (const auto& b : s.blocks)
        for (int v : {b.kh, b.kw, b.stride.h, b.stride.w}) w.u32(static_cast<std::uint32_t>(v));
}

int read_int(ByteReader& r) {
    const std::uint32_t v = r.u32();
    if (v > 1u << 24) throw FormatError("checkpoint: implausible architecture value " + std::to_string(v));
    return static_cast<int>(v);
}

ArchSpec read_spec(ByteReader& r) {
    ArchSpec s;
    const std::uint8_t tag = r.u8();
    if (tag > static_cast<std::uint8_t>(Backbone::alexnet))
        throw FormatError("checkpoint: unknown backbone tag " + std::to_string(tag));
    s.backbone = static_cast<Backbone>(tag);
    s.input.c = read_int(r);
    s.input.h = read_int(r);
    s.input.w = read_int(r);
    s.d1 = read_int(r);
    s.d2 = read_int(r);
    s.d3 = read_int(r);
    for (auto& b : s.blocks) {
        b.kh = read_int(r);
        b.kw = read_int(r);
        b.stride.h = read_int(r);
        b.stride.w = read_int(r);
    }
    return s;
}

std::vector<RunningStats*> running_stats(CaeModel& m) {
    std::vector<RunningStats*> out;
    for (auto* blocks : {&m.encoder, &m.decoder})
        for (auto& b : *blocks)
            if (b.has_norm) out.push_back(&b.running);
    return out;
}

}  // namespace

Bytes save_checkpoint(const CaeModel& model) {
    ByteWriter w;
    w.raw("CAEC");
    w.u16(kCheckpointVersion);
    write_spec(w, model.spec);
    w.u64(model.seed);

    const LayerNormConfig& ln = model.layernorm;
    w.u8(static_cast<std::uint8_t>(ln.mode));
    w.f32(ln.epsilon);
    w.u8(ln.frozen_mean && ln.frozen_var ? 1 : 0);
    w.f32(ln.frozen_mean.value_or(0.0f));
    w.f32(ln.frozen_var.value_or(0.0f));

    const auto params = model.params();
    w.u32(static_cast<std::uint32_t>(params.size()));
    for (const Param* p : params) {
        w.short_string(p->name);
        w.u32(static_cast<std::uint32_t>(p->value.size()));
        w.f32s(p->value.data());
    }
    for (auto* blocks : {&model.encoder, &model.decoder}) {
        for (const auto& b : *blocks) {
            if (!b.has_norm) continue;
            w.f32s(b.running.mean);
            w.f32s(b.running.var);
        }
    }
    for (const Param* p : params) {
        w.f32s(p->m.data());
        w.f32s(p->v.data());
        w.u64(p->step_count);
    }
    return w.take();
}

CaeModel load_checkpoint(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "checkpoint");
    if (r.raw(4) != "CAEC") throw FormatError("not a checkpoint (bad magic)");
    const std::uint16_t version = r.u16();
    if (version != kCheckpointVersion)
        throw FormatError("unsupported checkpoint version " + std::to_string(version));
    const ArchSpec spec = read_spec(r);
    const std::uint64_t seed = r.u64();
    CaeModel model;
    try {
        model = build_model(spec, seed);
    } catch (const ArchitectureError& e) {
        throw FormatError(std::string("checkpoint: invalid architecture: ") + e.what());
    }

    const std::uint8_t mode = r.u8();
    if (mode > static_cast<std::uint8_t>(LayerNormMode::frozen_stats))
        throw FormatError("checkpoint: unknown layer-norm mode " + std::to_string(mode));
    model.layernorm.mode = static_cast<LayerNormMode>(mode);
    model.layernorm.epsilon = r.f32();
    const bool has_stats = r.u8() != 0;
    const float mean = r.f32();
    const float var = r.f32();
    if (has_stats) {
        model.layernorm.frozen_mean = mean;
        model.layernorm.frozen_var = var;
    }
    try {
        model.layernorm.validate();
    } catch (const ConfigError& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    }

    const auto params = model.params();
    const std::uint32_t count = r.u32();
    if (count != params.size())
        throw FormatError("checkpoint: expected " + std::to_string(params.size()) +
                          " parameters, found " + std::to_string(count));
    for (Param* p : params) {
        const std::string name = r.short_string();
        if (name != p->name)
            throw FormatError("checkpoint: expected parameter " + p->name + ", found " + name);
        if (r.u32() != p->value.size())
            throw FormatError("checkpoint: size mismatch for parameter " + name);
        r.f32s(p->value.data());
    }
    for (RunningStats* s : running_stats(model)) {
        r.f32s(s->mean);
        r.f32s(s->var);
    }
    for (Param* p : params) {
        r.f32s(p->m.data());
        r.f32s(p->v.data());
        p->step_count = r.u64();
    }
    r.expect_end();
    return model;
}

void write_checkpoint(const std::filesystem::path& path, const CaeModel& model) {
    write_file(path, save_checkpoint(model));
}

CaeModel read_checkpoint(const std::filesystem::path& path) { return load_checkpoint(read_file(path)); }

std::uint64_t model_checksum(const CaeModel& model) { return fnv1a64(save_checkpoint(model)); }

}  // namespace caevpr
