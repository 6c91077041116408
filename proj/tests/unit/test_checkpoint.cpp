#include <gtest/gtest.h>

#include "caevpr/checkpoint.hpp"
#include "caevpr/error.hpp"
#include "caevpr/train.hpp"
#include "test_support.hpp"

using namespace caevpr;
using namespace caevpr::testing;

namespace {

// A model with nonzero Adam state, moved running stats and frozen layer-norm
// statistics so that every section of the file carries information.
CaeModel trained_model() {
    const FeatureMapSet data = synthetic_set(6, {32, 14, 20}, 21);
    CaeModel m = build_model(small_spec(), 4);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 3;
    cfg.layernorm.mode = LayerNormMode::frozen_stats;
    train(m, data, nullptr, cfg);
    return m;
}

void expect_same_model(const CaeModel& a, const CaeModel& b) {
    EXPECT_EQ(a.spec, b.spec);
    EXPECT_EQ(a.seed, b.seed);
    EXPECT_EQ(a.layernorm.mode, b.layernorm.mode);
    EXPECT_EQ(a.layernorm.frozen_mean, b.layernorm.frozen_mean);
    EXPECT_EQ(a.layernorm.frozen_var, b.layernorm.frozen_var);
    const auto pa = a.params();
    const auto pb = b.params();
    ASSERT_EQ(pa.size(), pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        EXPECT_EQ(pa[i]->name, pb[i]->name);
        EXPECT_EQ(pa[i]->value.values(), pb[i]->value.values());
        EXPECT_EQ(pa[i]->m.values(), pb[i]->m.values());
        EXPECT_EQ(pa[i]->v.values(), pb[i]->v.values());
        EXPECT_EQ(pa[i]->step_count, pb[i]->step_count);
    }
    for (std::size_t i = 0; i < a.encoder.size(); ++i) {
        EXPECT_EQ(a.encoder[i].running.mean, b.encoder[i].running.mean);
        EXPECT_EQ(a.encoder[i].running.var, b.encoder[i].running.var);
    }
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitExact) {
    const CaeModel m = trained_model();
    const Bytes bytes = save_checkpoint(m);
    const CaeModel back = load_checkpoint(bytes);
    expect_same_model(m, back);
    EXPECT_EQ(save_checkpoint(back), bytes);
}

TEST(Checkpoint, ReloadedModelEncodesIdentically) {
    const CaeModel m = trained_model();
    const CaeModel back = load_checkpoint(save_checkpoint(m));
    std::mt19937_64 rng(3);
    const Tensor4 f = random_tensor({3, 32, 14, 20}, rng);
    EXPECT_EQ(encode(m, f), encode(back, f));
}

TEST(Checkpoint, ResumedTrainingMatchesUninterrupted) {
    const FeatureMapSet data = synthetic_set(4, {32, 14, 20}, 22);
    CaeModel a = build_model(small_spec(), 4);
    const Tensor4 x = data.batch(0, 4);
    train_step(a, x, 1e-3);
    CaeModel b = load_checkpoint(save_checkpoint(a));
    train_step(a, x, 1e-3);
    train_step(b, x, 1e-3);
    EXPECT_EQ(save_checkpoint(a), save_checkpoint(b));
}

TEST(Checkpoint, FileRoundTrip) {
    TempDir dir("ckpt");
    const CaeModel m = trained_model();
    write_checkpoint(dir / "m.caec", m);
    expect_same_model(m, read_checkpoint(dir / "m.caec"));
    EXPECT_EQ(model_checksum(m), model_checksum(read_checkpoint(dir / "m.caec")));
}

TEST(Checkpoint, CorruptedMagicRejected) {
    Bytes bytes = save_checkpoint(build_model(small_spec(), 1));
    bytes[0] = 'X';
    EXPECT_THROW(load_checkpoint(bytes), FormatError);
}

TEST(Checkpoint, WrongVersionRejected) {
    Bytes bytes = save_checkpoint(build_model(small_spec(), 1));
    bytes[4] = 9;
    EXPECT_THROW(load_checkpoint(bytes), FormatError);
}

TEST(Checkpoint, EveryTruncationRejected) {
    const Bytes bytes = save_checkpoint(build_model(small_spec(16, 16, 8), 1));
    // Cut at a spread of offsets, including inside the header.
    for (std::size_t cut = 0; cut < bytes.size(); cut += 1 + cut / 3) {
        const std::span<const std::uint8_t> prefix(bytes.data(), cut);
        EXPECT_THROW(load_checkpoint(prefix), FormatError) << "cut at " << cut;
    }
    EXPECT_THROW(load_checkpoint(std::span<const std::uint8_t>(bytes.data(), bytes.size() - 1)), FormatError);
}

TEST(Checkpoint, TrailingBytesRejected) {
    Bytes bytes = save_checkpoint(build_model(small_spec(), 1));
    bytes.push_back(0);
    EXPECT_THROW(load_checkpoint(bytes), FormatError);
}

TEST(Checkpoint, ChecksumTracksWeights) {
    CaeModel m = build_model(small_spec(), 1);
    const auto before = model_checksum(m);
    EXPECT_EQ(before, model_checksum(build_model(small_spec(), 1)));
    m.encoder[0].weight.value[0] += 1.0f;
    EXPECT_NE(before, model_checksum(m));
}
