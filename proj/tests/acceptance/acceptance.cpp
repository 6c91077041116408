// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "caevpr/adam.hpp"
#include "caevpr/binary_io.hpp"
#include "caevpr/checkpoint.hpp"
#include "caevpr/dvec.hpp"
#include "caevpr/error.hpp"
#include "caevpr/fmap.hpp"
#include "caevpr/metrics.hpp"
#include "caevpr/model.hpp"
#include "caevpr/retrieval.hpp"
#include "caevpr/train.hpp"
#include "fixtures.hpp"
#include "gradient_checks.hpp"
#include "test_support.hpp"

using namespace caevpr;
using namespace caevpr::testing;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void criterion(const char* name, double time_limit_s, const std::function<Outcome()>& body) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (time_limit_s > 0 && secs >= time_limit_s) {
        o.pass = false;
        o.detail += " (over time limit " + std::to_string(time_limit_s) + " s)";
    }
    if (!o.pass) ++failures;
    std::printf("%s %-22s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", name, secs, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Outcome gradients() {
    struct Layer {
        const char* name;
        double (*check)(std::uint64_t);
    };
    const Layer layers[] = {{"conv", conv_gradient_error},         {"deconv", deconv_gradient_error},
                            {"batchnorm", batchnorm_gradient_error}, {"prelu", prelu_gradient_error},
                            {"layernorm", layernorm_gradient_error}, {"mse", mse_gradient_error}};
    double worst = 0.0;
    std::string detail;
    for (const auto& l : layers) {
        double m = 0.0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) m = std::max(m, l.check(seed));
        worst = std::max(worst, m);
        detail += std::string(l.name) + "=" + fmt("%.2e", m) + " ";
    }
    return {worst < 1e-3, "20 instances each, max rel err " + detail};
}

Outcome geometry() {
    const std::size_t v = ArchSpec::canonical(Backbone::vgg16, 256).descriptor_dim();
    const std::size_t a = ArchSpec::canonical(Backbone::alexnet, 256).descriptor_dim();
    const std::size_t v128 = ArchSpec::canonical(Backbone::vgg16, 128).descriptor_dim();
    const std::size_t a128 = ArchSpec::canonical(Backbone::alexnet, 128).descriptor_dim();
    const bool ok = v == 8192 && a == 8192 && v128 == 4096 && a128 == 4096;
    return {ok, "vgg16/256=" + std::to_string(v) + " alexnet/256=" + std::to_string(a) +
                    " vgg16/128=" + std::to_string(v128) + " alexnet/128=" + std::to_string(a128)};
}

Outcome shape_round_trip() {
    std::mt19937_64 rng(11);
    int checked = 0;
    std::string bad;
    for (Backbone bb : {Backbone::vgg16, Backbone::alexnet}) {
        const FeatureDims in = ArchSpec::canonical_input(bb);
        const Tensor4 x = random_tensor({1, in.c, in.h, in.w}, rng);
        for (int d3 = 8; d3 <= 512; d3 *= 2) {
            CaeModel m = build_model(ArchSpec::canonical(bb, d3), static_cast<std::uint64_t>(d3));
            const Tensor4 y = reconstruct(m, x, Mode::eval).output;
            if (!(y.shape() == x.shape())) bad += std::string(to_string(bb)) + "/" + std::to_string(d3) + " ";
            ++checked;
        }
    }
    return {bad.empty(), std::to_string(checked) + " configurations" + (bad.empty() ? "" : ", mismatched: " + bad)};
}

Outcome overfit() {
    const FeatureMapSet data = synthetic_set(8, {32, 14, 20}, 101);
    CaeModel m = build_model(small_spec(), 7);
    TrainConfig cfg;
    cfg.lr = 1e-3;
    cfg.batch_size = 8;
    cfg.epochs = 200;
    cfg.seed = 7;
    const TrainingLog log = train(m, data, nullptr, cfg);
    const double initial = log.step_losses.front();
    const double final_loss = reconstruct(m, data.batch(0, 8), Mode::train).loss;
    const double ratio = final_loss / initial;
    return {log.step_losses.size() == 200 && ratio <= 0.1,
            "initial " + fmt("%.5g", initial) + " final " + fmt("%.5g", final_loss) + " ratio " + fmt("%.4f", ratio)};
}

Outcome adam_first_step() {
    Param p("theta", {1, 1, 1, 1}, 0.0f);
    p.grad[0] = 1.0f;
    Param* ps[] = {&p};
    adam_step(ps, AdamOptions{});
    const double got = p.value[0];
    const double expected = -0.001 / (1.0 + 1e-8);
    return {std::abs(got - expected) <= 1e-9, "theta " + fmt("%.12f", got)};
}

DescriptorSet random_unit(std::size_t count, std::uint32_t dim, std::uint64_t seed, const char* prefix) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> n(0.0f, 1.0f);
    DescriptorSet set(dim);
    std::vector<float> v(dim);
    for (std::size_t i = 0; i < count; ++i) {
        for (float& x : v) x = n(rng);
        set.add(prefix + std::to_string(i), l2_normalize(v));
    }
    return set;
}

Outcome topk_oracle() {
    const DescriptorSet refs = random_unit(500, 64, 21, "r");
    const DescriptorSet queries = random_unit(50, 64, 22, "q");
    const int k = 25;
    const auto res = topk(queries, refs, k);
    std::size_t mismatches = 0;
    for (std::size_t q = 0; q < queries.size(); ++q) {
        std::vector<std::pair<double, std::size_t>> scored;
        const auto qv = queries.vector(q);
        for (std::size_t r = 0; r < refs.size(); ++r) {
            double acc = 0.0;
            const auto rv = refs.vector(r);
            for (std::size_t i = 0; i < qv.size(); ++i) acc += static_cast<double>(qv[i]) * rv[i];
            scored.emplace_back(acc, r);
        }
        std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        for (int i = 0; i < k; ++i)
            if (res[q].ranked[static_cast<std::size_t>(i)].reference_id != refs.ids()[scored[static_cast<std::size_t>(i)].second])
                ++mismatches;
    }
    return {mismatches == 0, "50x500, K=" + std::to_string(k) + ", mismatches " + std::to_string(mismatches)};
}

Outcome metrics() {
    std::vector<PrPoint> two(2);
    two[0].recall = 0.5;
    two[0].precision = 1.0;
    two[1].recall = 1.0;
    two[1].precision = 0.5;
    const double ap = average_precision(two);

    const HandFixture f = hand_fixture();
    const int ks[] = {1, 5, 10};
    const auto rec = recall_at_k(f.matches, f.gt, ks);
    const bool recall_ok = rec.at(1) == kFixtureRecall1 && rec.at(5) == kFixtureRecall5 && rec.at(10) == kFixtureRecall10;

    const auto tallies = fixture_pr_tallies();
    std::vector<double> thresholds;
    for (const auto& t : tallies) thresholds.push_back(t.threshold);
    const auto pr = pr_curve(f.matches, f.gt, thresholds);
    bool pr_ok = pr.size() == tallies.size();
    for (std::size_t i = 0; pr_ok && i < pr.size(); ++i)
        pr_ok = pr[i].tp == tallies[i].tp && pr[i].fp == tallies[i].fp && pr[i].fn == tallies[i].fn;

    const DescriptorSet a = random_unit(200, 128, 31, "a");
    const DescriptorSet b = random_unit(200, 128, 32, "b");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double s = dot(a.vector(i), b.vector(i));
        const double d = l2_distance(a.vector(i), b.vector(i));
        worst = std::max(worst, std::abs(d * d - (2.0 - 2.0 * s)));
    }
    const bool ok = ap == 0.75 && recall_ok && pr_ok && worst <= 1e-5;
    return {ok, "AP " + fmt("%.17g", ap) + ", recall@K " + (recall_ok ? "ok" : "wrong") + ", PR counts " +
                    (pr_ok ? "ok" : "wrong") + ", max |d2-(2-2s)| " + fmt("%.2e", worst)};
}

template <typename Fn>
bool rejects(Fn&& fn) {
    try {
        fn();
    } catch (const FormatError&) {
        return true;
    }
    return false;
}

Outcome round_trips() {
    TempDir dir("acceptance_io");
    std::string detail;
    bool ok = true;

    const FeatureMapSet maps = synthetic_set(6, {32, 14, 20}, 5);
    write_fmap(dir / "a.fmap", maps);
    const Bytes fbytes = read_file(dir / "a.fmap");
    write_fmap(dir / "b.fmap", read_fmap(dir / "a.fmap"));
    const bool fmap_ok = read_file(dir / "b.fmap") == fbytes;

    const CaeModel model = build_model(small_spec(), 9);
    DescriptorSet d(static_cast<std::uint32_t>(model.spec.descriptor_dim()), FlattenOrder::channel_major,
                    model_checksum(model));
    const auto desc = encode(model, maps.batch(0, maps.size()));
    for (std::size_t i = 0; i < desc.size(); ++i) d.add(maps.ids()[i], desc[i]);
    write_dvec(dir / "a.dvec", d);
    const Bytes dbytes = read_file(dir / "a.dvec");
    write_dvec(dir / "b.dvec", read_dvec(dir / "a.dvec"));
    const bool dvec_ok = read_file(dir / "b.dvec") == dbytes;

    write_checkpoint(dir / "a.caec", model);
    const Bytes cbytes = read_file(dir / "a.caec");
    write_checkpoint(dir / "b.caec", read_checkpoint(dir / "a.caec"));
    const bool ckpt_ok = read_file(dir / "b.caec") == cbytes;

    auto corrupt_rejected = [](const Bytes& good, auto parse) {
        Bytes bad = good;
        bad[0] ^= 0xFF;
        if (!rejects([&] { parse(bad); })) return false;
        for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{10}, good.size() / 2, good.size() - 1}) {
            const Bytes part(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(cut));
            if (!rejects([&] { parse(part); })) return false;
        }
        return true;
    };
    const bool reject_ok = corrupt_rejected(fbytes, [](const Bytes& b) { parse_fmap(b); }) &&
                           corrupt_rejected(dbytes, [](const Bytes& b) { parse_dvec(b); }) &&
                           corrupt_rejected(cbytes, [](const Bytes& b) { load_checkpoint(b); });

    ok = fmap_ok && dvec_ok && ckpt_ok && reject_ok;
    detail = std::string("FMAP ") + (fmap_ok ? "exact" : "differs") + ", DVEC " + (dvec_ok ? "exact" : "differs") +
             ", CAEC " + (ckpt_ok ? "exact" : "differs") + ", corruption " + (reject_ok ? "rejected" : "accepted");
    return {ok, detail};
}

struct RunArtifacts {
    std::vector<double> losses;
    Bytes checkpoint;
    Bytes dvec;
};

RunArtifacts seeded_run(const FeatureMapSet& train_set, const FeatureMapSet& val) {
    CaeModel m = build_model(small_spec(16, 16, 8), 42);
    TrainConfig cfg;
    cfg.batch_size = 4;
    cfg.epochs = 4;
    cfg.seed = 42;
    const TrainingLog log = train(m, train_set, &val, cfg);
    RunArtifacts r;
    for (const auto& e : log.epochs) {
        r.losses.push_back(e.train_loss);
        r.losses.push_back(e.val_loss.value_or(-1.0));
    }
    r.losses.insert(r.losses.end(), log.step_losses.begin(), log.step_losses.end());
    r.checkpoint = save_checkpoint(m);
    DescriptorSet d(static_cast<std::uint32_t>(m.spec.descriptor_dim()), FlattenOrder::channel_major,
                    model_checksum(m));
    const auto desc = encode(m, val.batch(0, val.size()));
    for (std::size_t i = 0; i < desc.size(); ++i) d.add(val.ids()[i], desc[i]);
    r.dvec = serialize_dvec(d);
    return r;
}

Outcome determinism() {
    const FeatureMapSet train_set = synthetic_set(10, {32, 14, 20}, 61);
    const FeatureMapSet val = synthetic_set(4, {32, 14, 20}, 62, Backbone::custom, "val");
    const RunArtifacts a = seeded_run(train_set, val);
    const RunArtifacts b = seeded_run(train_set, val);
    const bool logs = a.losses.size() == b.losses.size() &&
                      std::memcmp(a.losses.data(), b.losses.data(), a.losses.size() * sizeof(double)) == 0;
    const bool ckpt = a.checkpoint == b.checkpoint;
    const bool dvec = a.dvec == b.dvec;
    return {logs && ckpt && dvec, std::string("log ") + (logs ? "identical" : "differs") + ", checkpoint " +
                                      (ckpt ? "identical" : "differs") + ", DVEC " + (dvec ? "identical" : "differs")};
}

}  // namespace

int main() {
    criterion("gradient-suite", 60.0, gradients);
    criterion("geometry", 0.0, geometry);
    criterion("shape-round-trip", 0.0, shape_round_trip);
    criterion("overfit", 120.0, overfit);
    criterion("adam-first-step", 0.0, adam_first_step);
    criterion("topk-oracle", 0.0, topk_oracle);
    criterion("metrics", 0.0, metrics);
    criterion("format-round-trips", 10.0, round_trips);
    criterion("determinism", 0.0, determinism);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
