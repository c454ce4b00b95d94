#include "rsmt/dataset.hpp"

#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "rsmt/error.hpp"
#include "rsmt/parallel.hpp"
#include "rsmt/prng.hpp"

namespace rsmt {

namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void parse_failure(const std::string& source, std::size_t line, const std::string& what) {
    throw Error(ErrorCode::ParseError, source + ":" + std::to_string(line) + ": " + what);
}

NetRecord parse_record(const std::string& text, const std::string& source, std::size_t line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        parse_failure(source, line, std::string("invalid JSON at byte ") + std::to_string(e.byte) + ": " + e.what());
    }
    try {
        if (!j.is_object()) parse_failure(source, line, "record is not a JSON object");
        for (const char* key : {"id", "degree", "pins"}) {
            if (!j.contains(key)) parse_failure(source, line, std::string("missing key '") + key + "'");
        }
        std::vector<Point> pins;
        for (const auto& p : j.at("pins")) {
            if (!p.is_array() || p.size() != 2) parse_failure(source, line, "pin must be [x, y]");
            pins.push_back({p.at(0).get<Coord>(), p.at(1).get<Coord>()});
        }
        NetRecord record{Net(j.at("id").get<NetId>(), pins, std::numeric_limits<Coord>::max()), std::nullopt,
                         std::nullopt};
        const auto degree = j.at("degree").get<std::size_t>();
        if (degree != record.net.degree() || degree != pins.size()) {
            parse_failure(source, line, "degree " + std::to_string(degree) + " does not match " +
                                            std::to_string(pins.size()) + " listed pins (" +
                                            std::to_string(record.net.degree()) + " distinct)");
        }
        if (j.contains("labels")) record.labels = j.at("labels").get<std::vector<int>>();
        if (j.contains("wl_opt")) record.wl_opt = j.at("wl_opt").get<Coord>();
        validate_labels(record);
        return record;
    } catch (const nlohmann::json::exception& e) {
        parse_failure(source, line, e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ParseError) throw;
        parse_failure(source, line, e.what());
    }
}

}  // namespace

LabeledNet NetRecord::to_labeled() const {
    if (!labels) throw Error(ErrorCode::MissingOracle, "net " + std::to_string(net.id()) + " has no labels");
    return LabeledNet::from_steiner_set(net, *labels);
}

Net random_net(std::size_t degree, std::uint64_t seed, Coord coordinate_max, NetId id) {
    if (degree < 2) throw Error(ErrorCode::DegreeTooSmall, "random nets need degree >= 2");
    if (coordinate_max < 1 || static_cast<double>(degree) > static_cast<double>(coordinate_max + 1) * static_cast<double>(coordinate_max + 1)) {
        throw Error(ErrorCode::InvalidConfig, "coordinate range too small for the requested degree");
    }
    Pcg32 rng(seed);
    const auto span = static_cast<std::uint64_t>(coordinate_max) + 1;
    std::vector<Point> pins;
    pins.reserve(degree);
    while (pins.size() < degree) {
        Point p{static_cast<Coord>(rng.below(span)), static_cast<Coord>(rng.below(span))};
        if (std::find(pins.begin(), pins.end(), p) == pins.end()) pins.push_back(p);
    }
    return Net(id, pins, coordinate_max);
}

Dataset generate_dataset(std::span<const std::size_t> degrees, std::size_t nets_per_degree, std::uint64_t seed,
                         Coord coordinate_max) {
    if (degrees.empty()) throw Error(ErrorCode::InvalidConfig, "no degrees requested");
    Dataset out;
    out.reserve(degrees.size() * nets_per_degree);
    NetId next_id = 0;
    for (std::size_t degree : degrees) {
        for (std::size_t k = 0; k < nets_per_degree; ++k) {
            const std::uint64_t net_seed = derive_seed(seed, {degree, k});
            out.push_back({random_net(degree, net_seed, coordinate_max, next_id++), std::nullopt, std::nullopt});
        }
    }
    return out;
}

Dataset label_dataset(Dataset dataset, const OracleOptions& options, std::size_t jobs) {
    if (!options.allow_large_degree) {
        std::string offenders;
        std::size_t count = 0;
        for (const auto& r : dataset) {
            if (r.net.degree() <= options.max_degree) continue;
            if (count++ < 20) offenders += (offenders.empty() ? "" : ", ") + std::to_string(r.net.id());
        }
        if (count > 0) {
            throw Error(ErrorCode::DegreeTooLarge, std::to_string(count) + " net(s) exceed max_degree " +
                                                       std::to_string(options.max_degree) + ": " + offenders +
                                                       (count > 20 ? ", ..." : ""));
        }
    }
    parallel_for(dataset.size(), jobs, [&](std::size_t i) {
        OracleSolution sol = exact_rsmt(dataset[i].net, options);
        dataset[i].labels = std::move(sol.steiner_set);
        dataset[i].wl_opt = sol.optimal_wirelength;
    });
    return dataset;
}

void validate_labels(const NetRecord& record) {
    if (!record.labels) return;
    const HananGrid grid = build_hanan_grid(record.net);
    for (int idx : *record.labels) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= grid.size()) {
            throw Error(ErrorCode::ParseError, "net " + std::to_string(record.net.id()) + ": label index " +
                                                   std::to_string(idx) + " outside grid of " +
                                                   std::to_string(grid.size()) + " nodes");
        }
        if (grid.nodes[static_cast<std::size_t>(idx)].kind == NodeKind::Pin) {
            throw Error(ErrorCode::ParseError, "net " + std::to_string(record.net.id()) + ": label index " +
                                                   std::to_string(idx) + " is a pin");
        }
    }
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
    for (const auto& r : dataset) {
        ordered_json j;
        j["id"] = r.net.id();
        j["degree"] = r.net.degree();
        ordered_json pins = ordered_json::array();
        for (const Point& p : r.net.pins()) pins.push_back({p.x, p.y});
        j["pins"] = std::move(pins);
        if (r.labels) j["labels"] = *r.labels;
        if (r.wl_opt) j["wl_opt"] = *r.wl_opt;
        out << j.dump() << '\n';
    }
}

Dataset read_dataset(std::istream& in, const std::string& source) {
    Dataset out;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(parse_record(text, source, line));
    }
    if (in.bad()) throw Error(ErrorCode::IoError, source + ": read failed");
    return out;
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
    std::ostringstream buf;
    write_dataset(buf, dataset);
    write_file_atomically(path, buf.str());
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    return read_dataset(in, path.string());
}

void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw Error(ErrorCode::IoError, "write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace rsmt
