#include "cyclegate/config.hpp"

#include <filesystem>
#include <fstream>
#include <map>

namespace cyclegate {

namespace fs = std::filesystem;

namespace {

struct KeyValue {
    std::string value;
    int line = 0;
    bool consumed = false;
};

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

class FlatConfig {
public:
    FlatConfig(const std::string& path) : path_(path) {
        std::ifstream in(path);
        if (!in) throw io_error("cannot open config " + path);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            std::size_t eq = t.find('=');
            if (eq == std::string::npos)
                throw validation_error(path + ":" + std::to_string(lineno) +
                                       ": expected 'key = value', got '" + t + "'");
            std::string key = trim(t.substr(0, eq));
            if (key.empty())
                throw validation_error(path + ":" + std::to_string(lineno) + ": empty key");
            if (entries_.count(key))
                throw validation_error(path + ":" + std::to_string(lineno) + ": duplicate key '" +
                                       key + "'");
            entries_[key] = KeyValue{trim(t.substr(eq + 1)), lineno, false};
        }
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback = {}) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        it->second.consumed = true;
        return it->second.value;
    }

    double get_double(const std::string& key, double fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        it->second.consumed = true;
        try {
            std::size_t pos = 0;
            double v = std::stod(it->second.value, &pos);
            if (pos != it->second.value.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw validation_error(error_prefix(key, it->second) + "not a number: '" +
                                   it->second.value + "'");
        }
    }

    long get_int(const std::string& key, long fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        it->second.consumed = true;
        try {
            std::size_t pos = 0;
            long v = std::stol(it->second.value, &pos);
            if (pos != it->second.value.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw validation_error(error_prefix(key, it->second) + "not an integer: '" +
                                   it->second.value + "'");
        }
    }

    bool get_bool(const std::string& key, bool fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        it->second.consumed = true;
        if (it->second.value == "true") return true;
        if (it->second.value == "false") return false;
        throw validation_error(error_prefix(key, it->second) + "expected true|false, got '" +
                               it->second.value + "'");
    }

    /// All keys with the given prefix, in file order.
    std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
        std::vector<std::string> out;
        for (const auto& [k, v] : entries_)
            if (k.rfind(prefix, 0) == 0) out.push_back(k);
        return out;
    }

    void mark_consumed(const std::string& key) {
        auto it = entries_.find(key);
        if (it != entries_.end()) it->second.consumed = true;
    }

    void reject_unconsumed() const {
        for (const auto& [k, v] : entries_)
            if (!v.consumed)
                throw validation_error(path_ + ":" + std::to_string(v.line) + ": unknown key '" +
                                       k + "'");
    }

    const std::string& path() const { return path_; }

private:
    std::string error_prefix(const std::string& key, const KeyValue& kv) const {
        return path_ + ":" + std::to_string(kv.line) + ": key '" + key + "': ";
    }

    std::string path_;
    std::map<std::string, KeyValue> entries_;
};

}  // namespace

void RunConfig::validate() const {
    // The gate is validated only when stages are declared; the augment command
    // accepts configs without any.
    if (!eval.gate.stages.empty()) eval.validate();
    augment.validate();
    if (worker_count < 1)
        throw validation_error("RunConfig.worker_count: must be >= 1, got " +
                               std::to_string(worker_count));
}

RunConfig load_run_config(const std::string& path) {
    FlatConfig cfg(path);
    fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        if (p.empty()) return p;
        return (base / p).lexically_normal().string();
    };

    RunConfig run;
    run.manifest_path = resolve(cfg.get_string("manifest"));
    run.output_dir = resolve(cfg.get_string("output_dir", run.output_dir));
    run.worker_count = static_cast<int>(cfg.get_int("workers", run.worker_count));
    run.emit_mask_artifacts = cfg.get_bool("emit_mask_artifacts", run.emit_mask_artifacts);

    run.eval.catch_iou_threshold = cfg.get_double("catch_iou_threshold", 0.3);
    run.eval.yield_response_threshold = cfg.get_double("yield_response_threshold", 0.0);

    std::string miou_mode = cfg.get_string("miou_mode", "foreground-only");
    if (miou_mode == "foreground-only") {
        run.eval.gate.miou_mode = MiouMode::ForegroundOnly;
    } else if (miou_mode == "two-class-mean") {
        run.eval.gate.miou_mode = MiouMode::TwoClassMean;
    } else {
        throw validation_error(path + ": key 'miou_mode': expected foreground-only|two-class-mean, got '" +
                               miou_mode + "'");
    }

    for (int stage = 1; cfg.has("stage." + std::to_string(stage) + ".kind"); ++stage) {
        std::string prefix = "stage." + std::to_string(stage) + ".";
        GateStage gs;
        gs.segmenter.kind = parse_segmenter_kind(cfg.get_string(prefix + "kind"));
        gs.threshold = cfg.get_double(prefix + "threshold", 0.18);
        for (const std::string& key : cfg.keys_with_prefix(prefix + "param.")) {
            std::string name = key.substr(prefix.size() + 6);
            std::string value = cfg.get_string(key);
            if (name == "table") value = resolve(value);
            gs.segmenter.parameters[name] = value;
        }
        run.eval.gate.stages.push_back(std::move(gs));
    }

    run.augment.brightness_lo = cfg.get_double("augment.brightness_lo", 0.8);
    run.augment.brightness_hi = cfg.get_double("augment.brightness_hi", 1.2);
    run.augment.contrast_lo = cfg.get_double("augment.contrast_lo", 0.8);
    run.augment.contrast_hi = cfg.get_double("augment.contrast_hi", 1.2);
    run.augment.saturation_lo = cfg.get_double("augment.saturation_lo", 0.8);
    run.augment.saturation_hi = cfg.get_double("augment.saturation_hi", 1.2);
    run.augment.hflip_probability = cfg.get_double("augment.hflip_probability", 0.5);
    run.augment.seed = static_cast<std::uint64_t>(cfg.get_int("augment.seed", 0));

    cfg.reject_unconsumed();
    run.validate();
    return run;
}

}  // namespace cyclegate
