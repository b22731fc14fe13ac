#include "sgnet/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "sgnet/dataset_io.hpp"
#include "sgnet/error.hpp"

namespace sgnet {
namespace {

[[noreturn]] void bad(const std::string& origin, const std::string& key, const std::string& what) {
    throw ConfigError(origin + ": " + key + ": " + what);
}

double to_double(const std::string& origin, const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
        bad(origin, key, "expected a number, got '" + v + "'");
    return out;
}

std::uint64_t to_count(const std::string& origin, const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        bad(origin, key, "expected a non-negative integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& origin, const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    bad(origin, key, "expected true or false, got '" + v + "'");
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
        return v.substr(1, v.size() - 2);
    return v;
}

using Setter = std::function<void(RunConfig&, const std::string& origin, const std::string& key,
                                  const std::string& value)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto num = [&](const char* key, double RunConfig::*field) {
            t[key] = [field](RunConfig& c, auto& o, auto& k, auto& v) { c.*field = to_double(o, k, v); };
        };
        auto cnt = [&](const char* key, std::size_t RunConfig::*field) {
            t[key] = [field](RunConfig& c, auto& o, auto& k, auto& v) { c.*field = to_count(o, k, v); };
        };
        t["data.path"] = [](RunConfig& c, auto&, auto&, auto& v) { c.data_path = v; };
        cnt("data.subjects", &RunConfig::subjects);
        t["data.seed"] = [](RunConfig& c, auto& o, auto& k, auto& v) { c.data_seed = to_count(o, k, v); };
        t["data.shift_mean"] = [](RunConfig& c, auto& o, auto& k, auto& v) { c.shift.mean = to_double(o, k, v); };
        t["data.shift_std"] = [](RunConfig& c, auto& o, auto& k, auto& v) { c.shift.std = to_double(o, k, v); };

        t["model.profile"] = [](RunConfig& c, auto& o, auto& k, auto& v) {
            if (v == "paper") c.profile = DimsProfile::Paper;
            else if (v == "desk") c.profile = DimsProfile::Desk;
            else bad(o, k, "expected paper or desk, got '" + v + "'");
        };
        t["model.variant"] = [](RunConfig& c, auto& o, auto& k, auto& v) {
            const auto parsed = parse_variant(v);
            if (!parsed) bad(o, k, "unknown variant '" + v + "'");
            c.variant = *parsed;
        };
        t["model.prior"] = [](RunConfig& c, auto& o, auto& k, auto& v) {
            if (v == "lifted") c.prior = PriorKind::Lifted;
            else if (v == "standard_normal") c.prior = PriorKind::StandardNormal;
            else bad(o, k, "expected lifted or standard_normal, got '" + v + "'");
        };
        cnt("model.ec_iterations", &RunConfig::ec_iterations);
        t["model.teacher_forcing"] = [](RunConfig& c, auto& o, auto& k, auto& v) {
            c.teacher_forcing = to_bool(o, k, v);
        };

        cnt("train.folds", &RunConfig::folds);
        cnt("train.epochs", &RunConfig::epochs);
        num("train.lr_g", &RunConfig::lr_g);
        num("train.lr_d", &RunConfig::lr_d);
        cnt("train.batch_size", &RunConfig::batch_size);
        t["train.seed"] = [](RunConfig& c, auto& o, auto& k, auto& v) { c.seed = to_count(o, k, v); };
        cnt("train.checkpoint_every", &RunConfig::checkpoint_every);
        cnt("train.align_warmup_epochs", &RunConfig::align_warmup_epochs);
        t["train.out_dir"] = [](RunConfig& c, auto&, auto&, auto& v) { c.out_dir = v; };

        auto w = [&](const char* key, auto get) {
            t[key] = [get](RunConfig& c, auto& o, auto& k, auto& v) { get(c) = to_double(o, k, v); };
        };
        w("loss.align_adversarial", [](RunConfig& c) -> double& { return c.align_weights.adversarial; });
        w("loss.align_reconstruction", [](RunConfig& c) -> double& { return c.align_weights.reconstruction; });
        w("loss.align_kl", [](RunConfig& c) -> double& { return c.align_weights.kl; });
        w("loss.gtp_adversarial", [](RunConfig& c) -> double& { return c.gtp_weights.adversarial; });
        w("loss.gtp_l1", [](RunConfig& c) -> double& { return c.gtp_weights.l1; });
        w("loss.gtp_pcc", [](RunConfig& c) -> double& { return c.gtp_weights.pcc; });
        w("loss.gtp_topology", [](RunConfig& c) -> double& { return c.gtp_weights.topology; });
        return t;
    }();
    return table;
}

std::string prior_name(PriorKind p) {
    return p == PriorKind::Lifted ? "lifted" : "standard_normal";
}

}  // namespace

std::string_view profile_name(DimsProfile p) { return p == DimsProfile::Paper ? "paper" : "desk"; }

void RunConfig::validate() const {
    const std::string o = "config";
    if (data_path.empty() && subjects < folds)
        bad(o, "data.subjects", "need at least one subject per fold");
    if (folds < 2) bad(o, "train.folds", "need at least 2 folds");
    if (!(lr_g > 0.0)) bad(o, "train.lr_g", "must be > 0");
    if (!(lr_d > 0.0)) bad(o, "train.lr_d", "must be > 0");
    if (batch_size == 0) bad(o, "train.batch_size", "must be > 0");
    if (checkpoint_every == 0) bad(o, "train.checkpoint_every", "must be > 0");
    for (const auto& [key, v] :
         {std::pair{"loss.align_adversarial", align_weights.adversarial},
          std::pair{"loss.align_reconstruction", align_weights.reconstruction},
          std::pair{"loss.align_kl", align_weights.kl}, std::pair{"loss.gtp_adversarial", gtp_weights.adversarial},
          std::pair{"loss.gtp_l1", gtp_weights.l1}, std::pair{"loss.gtp_pcc", gtp_weights.pcc},
          std::pair{"loss.gtp_topology", gtp_weights.topology}})
        if (!(v >= 0.0)) bad(o, key, "loss weights must be >= 0");
}

ModelDims RunConfig::dims() const {
    return profile == DimsProfile::Paper ? ModelDims::paper() : ModelDims::desk();
}

GanConfig RunConfig::gan_config() const {
    GanConfig g;
    g.variant = variant;
    g.align_weights = align_weights;
    g.gtp_weights = gtp_weights;
    g.lr_g = lr_g;
    g.lr_d = lr_d;
    g.ec_iterations = ec_iterations;
    g.teacher_forcing = teacher_forcing;
    g.prior = prior;
    return g;
}

RunConfig parse_run_config(const std::string& ini_text, const std::string& origin) {
    std::istringstream in(ini_text);
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigINI().from_config(in);
    } catch (const CLI::Error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    RunConfig c;
    for (const CLI::ConfigItem& item : items) {
        if (item.name == "++" || item.name == "--") continue;  // section markers
        const std::string key = item.fullname();
        const auto it = setters().find(key);
        if (it == setters().end()) bad(origin, key, "unknown key");
        if (item.inputs.size() != 1) bad(origin, key, "expected exactly one value");
        it->second(c, origin, key, unquote(item.inputs.front()));
    }
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open config " + file.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str(), file.string());
}

std::string to_ini(const RunConfig& c) {
    std::ostringstream o;
    auto d = [](double v) { return format_double(v); };
    o << "[data]\n"
      << "path = \"" << c.data_path.string() << "\"\n"
      << "subjects = " << c.subjects << "\n"
      << "seed = " << c.data_seed << "\n"
      << "shift_mean = " << d(c.shift.mean) << "\n"
      << "shift_std = " << d(c.shift.std) << "\n\n"
      << "[model]\n"
      << "profile = " << profile_name(c.profile) << "\n"
      << "variant = " << variant_name(c.variant) << "\n"
      << "prior = " << prior_name(c.prior) << "\n"
      << "ec_iterations = " << c.ec_iterations << "\n"
      << "teacher_forcing = " << (c.teacher_forcing ? "true" : "false") << "\n\n"
      << "[train]\n"
      << "folds = " << c.folds << "\n"
      << "epochs = " << c.epochs << "\n"
      << "lr_g = " << d(c.lr_g) << "\n"
      << "lr_d = " << d(c.lr_d) << "\n"
      << "batch_size = " << c.batch_size << "\n"
      << "seed = " << c.seed << "\n"
      << "checkpoint_every = " << c.checkpoint_every << "\n"
      << "align_warmup_epochs = " << c.align_warmup_epochs << "\n"
      << "out_dir = \"" << c.out_dir.string() << "\"\n\n"
      << "[loss]\n"
      << "align_adversarial = " << d(c.align_weights.adversarial) << "\n"
      << "align_reconstruction = " << d(c.align_weights.reconstruction) << "\n"
      << "align_kl = " << d(c.align_weights.kl) << "\n"
      << "gtp_adversarial = " << d(c.gtp_weights.adversarial) << "\n"
      << "gtp_l1 = " << d(c.gtp_weights.l1) << "\n"
      << "gtp_pcc = " << d(c.gtp_weights.pcc) << "\n"
      << "gtp_topology = " << d(c.gtp_weights.topology) << "\n";
    return o.str();
}

void apply_env_overrides(RunConfig& c) {
    if (const char* s = std::getenv("SGNET_SEED"); s && *s) c.seed = to_count("SGNET_SEED", "train.seed", s);
    if (const char* s = std::getenv("SGNET_OUT_DIR"); s && *s) c.out_dir = s;
}

std::uint64_t training_hash(const RunConfig& c) {
    RunConfig k = c;
    k.epochs = 0;
    k.checkpoint_every = 1;
    k.out_dir.clear();
    const std::string text = to_ini(k);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

bool operator==(const RunConfig& a, const RunConfig& b) { return to_ini(a) == to_ini(b); }

}  // namespace sgnet
