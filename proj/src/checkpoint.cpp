#include "sgnet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sgnet/error.hpp"

namespace sgnet {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'S', 'G', 'N', 'E', 'T', 'C', 'K', '1'};

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

struct OptimizerSlot {
    const char* name;
    AdamW Optimizers::*member;
};

constexpr OptimizerSlot kOptimizers[] = {
    {"generator", &Optimizers::generator},
    {"discriminator", &Optimizers::discriminator},
    {"warmup_generator", &Optimizers::warmup_generator},
    {"warmup_discriminator", &Optimizers::warmup_discriminator},
};

// Model tensors in a fixed order: parameters, buffers, the prior projection.
std::vector<std::pair<std::string, Matrix*>> model_tensors(SgNetParams& m) {
    std::vector<std::pair<std::string, Matrix*>> out;
    ParamRefs refs = m.all_refs();
    for (Parameter* p : refs.params) out.emplace_back(p->name, &p->value);
    for (auto& [name, buf] : refs.buffers) out.emplace_back(name, buf);
    out.emplace_back("prior.projection", &m.projection);
    return out;
}

}  // namespace

void save_checkpoint(const TrainingState& state_in, const fs::path& file) {
    TrainingState& state = const_cast<TrainingState&>(state_in);  // read only
    std::vector<std::pair<std::string, const Matrix*>> tensors;
    for (auto& [name, m] : model_tensors(state.model)) tensors.emplace_back(name, m);
    json optimizers = json::array();
    for (const OptimizerSlot& slot : kOptimizers) {
        const AdamW& opt = state.optimizers.*slot.member;
        optimizers.push_back({{"name", slot.name}, {"step", opt.step()},
                              {"moments", opt.first_moments().size()}});
        for (std::size_t i = 0; i < opt.first_moments().size(); ++i) {
            tensors.emplace_back(std::string("opt.") + slot.name + ".m." + std::to_string(i),
                                 &opt.first_moments()[i]);
            tensors.emplace_back(std::string("opt.") + slot.name + ".v." + std::to_string(i),
                                 &opt.second_moments()[i]);
        }
    }

    json header;
    header["format"] = "sgnet-checkpoint";
    header["version"] = 1;
    header["config"] = to_ini(state.config);
    header["config_hash"] = training_hash(state.config);
    header["fold"] = state.fold;
    header["epoch"] = state.epoch;
    header["rng"] = state.rng.serialize();
    header["stat_target"] = {{"mean", state.stat_target.mean}, {"std", state.stat_target.std}};
    header["optimizers"] = optimizers;
    json entries = json::array();
    std::set<std::string> seen;
    std::uint64_t offset = 0;
    for (const auto& [name, m] : tensors) {
        if (!seen.insert(name).second) throw ContractError("save_checkpoint: duplicate tensor " + name);
        entries.push_back({{"name", name}, {"rows", m->rows()}, {"cols", m->cols()}, {"offset", offset}});
        offset += m->size();
    }
    header["tensors"] = entries;

    std::string blob(kMagic, sizeof kMagic);
    const std::string text = header.dump();
    put_u64(blob, text.size());
    blob += text;
    blob.reserve(blob.size() + 8 * offset);
    for (const auto& [name, m] : tensors)
        for (double v : m->values()) put_u64(blob, std::bit_cast<std::uint64_t>(v));

    std::error_code ec;
    if (file.has_parent_path()) fs::create_directories(file.parent_path(), ec);
    const fs::path tmp = file.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write checkpoint " + tmp.string());
        out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, file, ec);
    if (ec) throw IoError("cannot move checkpoint into place at " + file.string() + ": " + ec.message());
}

TrainingState load_checkpoint(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + file.string());
    const std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
    auto fail = [&](const std::string& what) -> ParseError {
        return ParseError(file.string() + ": " + what);
    };
    if (blob.size() < 16 || std::memcmp(blob.data(), kMagic, sizeof kMagic) != 0)
        throw fail("not an sgnet checkpoint (bad magic)");
    const std::uint64_t header_len = get_u64(bytes + 8);
    if (header_len > blob.size() - 16) throw fail("truncated header");
    json header;
    try {
        header = json::parse(blob.substr(16, header_len));
    } catch (const json::exception& e) {
        throw fail(std::string("header: ") + e.what());
    }
    const std::size_t payload = 16 + header_len;

    TrainingState st;
    try {
        if (header.at("version").get<int>() != 1) throw fail("unsupported checkpoint version");
        st.config = parse_run_config(header.at("config").get<std::string>(), file.string());
        if (header.at("config_hash").get<std::uint64_t>() != training_hash(st.config))
            throw fail("config hash does not match the stored config");
        st.fold = header.at("fold").get<std::size_t>();
        st.epoch = header.at("epoch").get<std::size_t>();
        st.rng.deserialize(header.at("rng").get<std::string>());
        st.stat_target = {header.at("stat_target").at("mean").get<double>(),
                          header.at("stat_target").at("std").get<double>()};
        st.model = SgNetParams::init(st.config.dims(), 0);

        std::map<std::string, Matrix*> slots;
        for (auto& [name, m] : model_tensors(st.model)) slots[name] = m;
        std::map<std::string, std::pair<std::vector<Matrix>*, std::size_t>> moment_slots;
        for (const auto& o : header.at("optimizers")) {
            const std::string name = o.at("name").get<std::string>();
            const OptimizerSlot* slot = nullptr;
            for (const OptimizerSlot& s : kOptimizers)
                if (name == s.name) slot = &s;
            if (!slot) throw fail("unknown optimizer '" + name + "'");
            AdamW& opt = st.optimizers.*slot->member;
            opt.set_step(o.at("step").get<std::size_t>());
            const auto count = o.at("moments").get<std::size_t>();
            opt.first_moments().resize(count);
            opt.second_moments().resize(count);
            for (std::size_t i = 0; i < count; ++i) {
                moment_slots["opt." + name + ".m." + std::to_string(i)] = {&opt.first_moments(), i};
                moment_slots["opt." + name + ".v." + std::to_string(i)] = {&opt.second_moments(), i};
            }
        }

        std::size_t filled = 0;
        for (const auto& t : header.at("tensors")) {
            const std::string name = t.at("name").get<std::string>();
            const auto rows = t.at("rows").get<std::size_t>();
            const auto cols = t.at("cols").get<std::size_t>();
            const auto offset = t.at("offset").get<std::uint64_t>();
            if (offset + rows * cols > (blob.size() - payload) / 8) throw fail("truncated tensor " + name);
            std::vector<double> data(rows * cols);
            for (std::size_t i = 0; i < data.size(); ++i)
                data[i] = std::bit_cast<double>(get_u64(bytes + payload + 8 * (offset + i)));
            Matrix value = rows * cols != 0 ? Matrix(rows, cols, std::move(data)) : Matrix();
            if (auto it = slots.find(name); it != slots.end()) {
                if (!it->second->same_shape(value))
                    throw fail("tensor " + name + " has shape " + value.shape_str() + ", model expects " +
                               it->second->shape_str());
                *it->second = std::move(value);
                ++filled;
            } else if (auto mt = moment_slots.find(name); mt != moment_slots.end()) {
                (*mt->second.first)[mt->second.second] = std::move(value);
            } else {
                throw fail("unexpected tensor " + name);
            }
        }
        if (filled != slots.size()) throw fail("checkpoint is missing model tensors");
    } catch (const json::exception& e) {
        throw fail(std::string("header: ") + e.what());
    } catch (const ConfigError& e) {
        throw fail(e.what());
    }
    return st;
}

}  // namespace sgnet
