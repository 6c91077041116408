#include "caevpr/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "caevpr/checkpoint.hpp"
#include "caevpr/dvec.hpp"
#include "caevpr/error.hpp"
#include "caevpr/fmap.hpp"
#include "caevpr/ground_truth.hpp"
#include "caevpr/report.hpp"
#include "caevpr/retrieval.hpp"
#include "caevpr/train.hpp"

namespace caevpr {

namespace fs = std::filesystem;

namespace {

std::string fmt_loss(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw DataError("cannot create output directory " + dir.string());
}

struct TrainArgs {
    std::string features;
    std::string val;
    std::string backbone;
    std::string blocks;
    int d1 = 128;
    int d2 = 128;
    int d3 = 0;
    double lr = 1e-3;
    int batch = 128;
    int epochs = 50;
    std::uint64_t seed = 0;
    std::string out = ".";
    int checkpoint_every = 0;
    std::string layernorm = "per_sample";
    bool no_shuffle = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
    const FeatureMapSet train_set = read_fmap(a.features);
    std::optional<FeatureMapSet> val_set;
    if (!a.val.empty()) val_set = read_fmap(a.val);

    ArchSpec spec;
    spec.backbone = parse_backbone(a.backbone);
    if (spec.backbone == Backbone::custom) {
        if (a.blocks.empty()) throw ConfigError("--backbone custom requires --blocks");
        spec.blocks = parse_blocks(a.blocks);
    } else {
        if (!a.blocks.empty()) throw ConfigError("--blocks is only valid with --backbone custom");
        spec.blocks = ArchSpec::canonical_blocks(spec.backbone);
    }
    if (train_set.backbone() != spec.backbone)
        throw DimensionError("feature maps were extracted with " +
                             std::string(to_string(train_set.backbone())) + ", not " + a.backbone);
    spec.input = train_set.dims();
    spec.d1 = a.d1;
    spec.d2 = a.d2;
    spec.d3 = a.d3;
    spec.validate();

    TrainConfig cfg;
    cfg.lr = a.lr;
    cfg.batch_size = a.batch;
    cfg.epochs = a.epochs;
    cfg.seed = a.seed;
    cfg.shuffle = !a.no_shuffle;
    cfg.checkpoint_every = a.checkpoint_every;
    if (a.layernorm == "frozen_stats")
        cfg.layernorm.mode = LayerNormMode::frozen_stats;
    else if (a.layernorm != "per_sample")
        throw ConfigError("--layernorm must be per_sample or frozen_stats");
    cfg.validate();

    const fs::path dir(a.out);
    ensure_dir(dir);

    std::ostringstream header;
    header << "# caevpr train lr=" << fmt_loss(cfg.lr) << " batch=" << cfg.batch_size
           << " epochs=" << cfg.epochs << " seed=" << cfg.seed << " backbone=" << a.backbone
           << " d1=" << spec.d1 << " d2=" << spec.d2 << " d3=" << spec.d3
           << " input=" << spec.input.str() << " descriptor_dim=" << spec.descriptor_dim()
           << " layernorm=" << a.layernorm << "\n";
    out << header.str();
    if (!spec.canonical_d3()) out << "# note: d3=" << spec.d3 << " is outside {8,...,512}\n";

    CaeModel model = build_model(spec, cfg.seed);
    const TrainingLog log = train(
        model, train_set, val_set ? &*val_set : nullptr, cfg, [&](int epoch, const CaeModel& m) {
            write_checkpoint(dir / ("model_epoch" + std::to_string(epoch) + ".caec"), m);
        });

    std::string csv = header.str() + "epoch,train_loss,val_loss\n";
    for (const auto& e : log.epochs) {
        csv += std::to_string(e.epoch) + "," + fmt_loss(e.train_loss) + "," +
               (e.val_loss ? fmt_loss(*e.val_loss) : "") + "\n";
        out << "epoch " << e.epoch << " train_loss " << fmt_loss(e.train_loss);
        if (e.val_loss) out << " val_loss " << fmt_loss(*e.val_loss);
        out << "\n";
    }
    write_text_file(dir / "train_log.csv", csv);
    write_checkpoint(dir / "model.caec", model);
    out << "wrote " << (dir / "model.caec").string() << "\n";
    return kExitOk;
}

int cmd_encode(const std::string& checkpoint, const std::string& features, const std::string& path,
               int batch, std::ostream& out) {
    if (batch < 1) throw ConfigError("--batch must be >= 1");
    const CaeModel model = read_checkpoint(checkpoint);
    const FeatureMapSet set = read_fmap(features);
    if (set.backbone() != model.spec.backbone)
        throw DimensionError("checkpoint expects " + std::string(to_string(model.spec.backbone)) +
                             " feature maps, file has " + std::string(to_string(set.backbone())));
    if (!(set.dims() == model.spec.input))
        throw DimensionError("checkpoint expects feature maps " + model.spec.input.str() +
                             ", file has " + set.dims().str());

    DescriptorSet descriptors(static_cast<std::uint32_t>(model.spec.descriptor_dim()),
                              FlattenOrder::channel_major, model_checksum(model));
    const std::size_t step = static_cast<std::size_t>(batch);
    for (std::size_t first = 0; first < set.size(); first += step) {
        const std::size_t n = std::min(step, set.size() - first);
        const auto vecs = encode(model, set.batch(first, n));
        for (std::size_t i = 0; i < n; ++i) descriptors.add(set.ids()[first + i], vecs[i]);
    }
    write_dvec(path, descriptors);
    out << "encoded " << descriptors.size() << " descriptors of dim " << descriptors.dim() << "\n";
    return kExitOk;
}

int cmd_match(const std::string& queries, const std::string& references, int k,
              const std::string& path, std::ostream& out) {
    const DescriptorSet q = read_dvec(queries);
    const DescriptorSet r = read_dvec(references);
    const auto matches = topk(q, r, k);
    write_text_file(path, format_matches(matches));
    out << "matched " << matches.size() << " queries against " << r.size() << " references\n";
    return kExitOk;
}

struct EvalArgs {
    std::string matches;
    std::string queries;
    std::string references;
    std::string gt;
    std::vector<int> ks{1, 5, 10};
    int thresholds = 256;
    int bins = 50;
    std::string out;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    const bool have_descriptors = !a.queries.empty() && !a.references.empty();
    if (a.matches.empty() && !have_descriptors)
        throw ConfigError("eval needs --matches or both --queries and --references");
    if (a.queries.empty() != a.references.empty())
        throw ConfigError("--queries and --references must be given together");

    const GroundTruth gt = load_pair_list(a.gt);
    std::optional<DescriptorSet> q;
    std::optional<DescriptorSet> r;
    if (have_descriptors) {
        q = read_dvec(a.queries);
        r = read_dvec(a.references);
    }
    std::vector<MatchResult> matches;
    if (!a.matches.empty()) {
        matches = parse_matches(read_text_file(a.matches));
    } else {
        const int max_k = *std::max_element(a.ks.begin(), a.ks.end());
        matches = topk(*q, *r, std::clamp(max_k, 1, static_cast<int>(std::max<std::size_t>(r->size(), 1))));
    }

    EvalOptions opts;
    opts.ks = a.ks;
    opts.thresholds = a.thresholds;
    opts.bins = a.bins;
    const EvalReport rep = evaluate(matches, gt, opts, q ? &*q : nullptr, r ? &*r : nullptr);
    write_report(a.out, rep);
    for (const auto& [k, v] : rep.recall_at) out << "R@" << k << " " << fmt_loss(v) << "\n";
    out << "AP " << fmt_loss(rep.ap) << "\n";
    if (rep.l2) out << "mean_gap " << fmt_loss(rep.l2->mean_gap) << "\n";
    return kExitOk;
}

struct GtArgs {
    std::string protocol;
    std::string queries;
    std::string references;
    std::string pairs;
    double radius = 25.0;
    int window = 2;
    int count = -1;
    std::string out;
};

int cmd_gt(const GtArgs& a, std::ostream& out, std::ostream& err) {
    GroundTruth gt;
    if (a.protocol == "radius") {
        if (a.queries.empty() || a.references.empty())
            throw DataError("radius protocol needs --queries and --references manifests with poses");
        const Manifest qm = read_manifest(a.queries);
        const Manifest rm = read_manifest(a.references);
        PoseTable qp;
        for (const auto& row : qm.rows)
            if (row.x && row.y) qp.add(row.image_id, *row.x, *row.y);
        gt = build_ground_truth_radius(qm.ids(), qp, rm.poses(), a.radius);
    } else if (a.protocol == "frames") {
        if (!a.queries.empty() || !a.references.empty()) {
            if (a.queries.empty() || a.references.empty())
                throw DataError("frames protocol needs both --queries and --references manifests");
            gt = build_ground_truth_frames(read_manifest(a.queries).ids(),
                                           read_manifest(a.references).ids(), a.window);
        } else if (a.count >= 0) {
            gt = build_ground_truth_frames(a.count, a.window);
        } else {
            throw DataError("frames protocol needs manifests or --count");
        }
    } else if (a.protocol == "pairs") {
        if (a.pairs.empty()) throw DataError("pairs protocol needs --pairs");
        std::vector<std::string> warnings;
        std::optional<std::vector<std::string>> declared;
        if (!a.queries.empty()) declared = read_manifest(a.queries).ids();
        gt = load_pair_list(a.pairs, declared ? &*declared : nullptr, &warnings);
        for (const auto& w : warnings) err << "caevpr: warning: " << w << "\n";
    } else {
        throw ConfigError("--protocol must be radius, frames or pairs");
    }
    write_ground_truth(a.out, gt);
    out << "wrote ground truth for " << gt.valid.size() << " queries\n";
    return kExitOk;
}

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Compact place descriptors from a convolutional autoencoder", "caevpr"};
    app.require_subcommand(1);

    TrainArgs ta;
    auto* train_cmd = app.add_subcommand("train", "train the autoencoder on FMAP feature maps");
    train_cmd->add_option("--features", ta.features, "training FMAP file")->required();
    train_cmd->add_option("--val", ta.val, "validation FMAP file");
    train_cmd->add_option("--backbone", ta.backbone, "vgg16 | alexnet | custom")->required();
    train_cmd->add_option("--blocks", ta.blocks, "custom block geometry, e.g. 4x4/1,5x3/2,2x2/2");
    train_cmd->add_option("--d1", ta.d1)->capture_default_str();
    train_cmd->add_option("--d2", ta.d2)->capture_default_str();
    train_cmd->add_option("--d3", ta.d3, "channels of the last encoder block")->required();
    train_cmd->add_option("--lr", ta.lr)->capture_default_str();
    train_cmd->add_option("--batch", ta.batch)->capture_default_str();
    train_cmd->add_option("--epochs", ta.epochs)->capture_default_str();
    train_cmd->add_option("--seed", ta.seed)->capture_default_str();
    train_cmd->add_option("--out", ta.out, "output directory")->capture_default_str();
    train_cmd->add_option("--checkpoint-every", ta.checkpoint_every)->capture_default_str();
    train_cmd->add_option("--layernorm", ta.layernorm, "per_sample | frozen_stats")->capture_default_str();
    train_cmd->add_flag("--no-shuffle", ta.no_shuffle);

    std::string ckpt, features, dvec_out;
    int encode_batch = 32;
    auto* encode_cmd = app.add_subcommand("encode", "encode FMAP feature maps into DVEC descriptors");
    encode_cmd->add_option("--checkpoint", ckpt)->required();
    encode_cmd->add_option("--features", features)->required();
    encode_cmd->add_option("--out", dvec_out)->required();
    encode_cmd->add_option("--batch", encode_batch)->capture_default_str();

    std::string mq, mr, mout;
    int k = 1;
    auto* match_cmd = app.add_subcommand("match", "exact top-K retrieval");
    match_cmd->add_option("--queries", mq)->required();
    match_cmd->add_option("--references", mr)->required();
    match_cmd->add_option("--k", k)->capture_default_str();
    match_cmd->add_option("--out", mout)->required();

    EvalArgs ea;
    auto* eval_cmd = app.add_subcommand("eval", "Recall@K, PR curve, AP and L2 distributions");
    eval_cmd->add_option("--matches", ea.matches);
    eval_cmd->add_option("--queries", ea.queries);
    eval_cmd->add_option("--references", ea.references);
    eval_cmd->add_option("--gt", ea.gt)->required();
    eval_cmd->add_option("--ks", ea.ks)->delimiter(',')->capture_default_str();
    eval_cmd->add_option("--thresholds", ea.thresholds)->capture_default_str();
    eval_cmd->add_option("--bins", ea.bins)->capture_default_str();
    eval_cmd->add_option("--out", ea.out)->required();

    GtArgs ga;
    auto* gt_cmd = app.add_subcommand("gt", "build a ground-truth CSV");
    gt_cmd->add_option("--protocol", ga.protocol, "radius | frames | pairs")->required();
    gt_cmd->add_option("--queries", ga.queries, "query manifest CSV");
    gt_cmd->add_option("--references", ga.references, "reference manifest CSV");
    gt_cmd->add_option("--pairs", ga.pairs, "query_id,ref_id CSV");
    gt_cmd->add_option("--radius", ga.radius)->capture_default_str();
    gt_cmd->add_option("--window", ga.window)->capture_default_str();
    gt_cmd->add_option("--count", ga.count, "frame count when no manifests are given");
    gt_cmd->add_option("--out", ga.out)->required();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "caevpr: error[usage]: " << one_line(e.what()) << "\n";
        return kExitUsage;
    }

    try {
        if (*train_cmd) return cmd_train(ta, out);
        if (*encode_cmd) return cmd_encode(ckpt, features, dvec_out, encode_batch, out);
        if (*match_cmd) return cmd_match(mq, mr, k, mout, out);
        if (*eval_cmd) return cmd_eval(ea, out);
        if (*gt_cmd) return cmd_gt(ga, out, err);
    } catch (const NumericError& e) {
        err << "caevpr: error[numeric]: " << one_line(e.what()) << "\n";
        return kExitNumeric;
    } catch (const ConfigError& e) {
        err << "caevpr: error[usage]: " << one_line(e.what()) << "\n";
        return kExitUsage;
    } catch (const ArchitectureError& e) {
        err << "caevpr: error[usage]: " << one_line(e.what()) << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "caevpr: error[" << e.kind() << "]: " << one_line(e.what()) << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        err << "caevpr: error[data]: " << one_line(e.what()) << "\n";
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace caevpr
