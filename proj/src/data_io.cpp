#include "rpcl/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace rpcl::io {

namespace {

// All integers in the binary containers are little-endian; doubles are
// IEEE-754 binary64 little-endian. Serialization goes through explicit byte
// shuffling so the formats are identical on any host.

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class Reader {
public:
    Reader(std::string bytes, std::string path)
        : bytes_(std::move(bytes)), path_(std::move(path)) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i)
            v = (v << 8) | static_cast<unsigned char>(bytes_[pos_ + i]);
        pos_ += 4;
        return v;
    }

    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 7; i >= 0; --i)
            bits = (bits << 8) | static_cast<unsigned char>(bytes_[pos_ + i]);
        pos_ += 8;
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }

    void expect_magic(const char* magic) {
        need(4);
        if (std::memcmp(bytes_.data() + pos_, magic, 4) != 0) {
            throw BadMagic(path_ + ": expected magic \"" + magic + "\"");
        }
        pos_ += 4;
    }

    void done() {
        if (pos_ != bytes_.size()) {
            throw TruncatedFile(path_ + ": trailing bytes after payload");
        }
    }

private:
    void need(std::size_t n) {
        if (pos_ + n > bytes_.size()) {
            throw TruncatedFile(path_ + ": file ends inside a field");
        }
    }

    std::string bytes_;
    std::string path_;
    std::size_t pos_ = 0;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

void spill(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write: " + path);
}

}  // namespace

void write_matrix(const std::string& path, const DenseMatrix& m) {
    if (!numerics::all_finite(m)) throw NonFiniteValue(path + ": refusing to write NaN/Inf");
    std::string bytes;
    bytes.reserve(12 + 8 * m.size());
    bytes += "FMAT";
    put_u32(bytes, static_cast<std::uint32_t>(m.rows()));
    put_u32(bytes, static_cast<std::uint32_t>(m.cols()));
    for (double v : m.data()) put_f64(bytes, v);
    spill(path, bytes);
}

DenseMatrix read_matrix(const std::string& path) {
    Reader r(slurp(path), path);
    r.expect_magic("FMAT");
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    std::vector<double> entries(static_cast<std::size_t>(rows) * cols);
    for (auto& v : entries) {
        v = r.f64();
        if (!std::isfinite(v)) throw NonFiniteValue(path + ": non-finite matrix entry");
    }
    r.done();
    return DenseMatrix(rows, cols, std::move(entries));
}

void write_labels(const std::string& path, const std::vector<ClassId>& labels) {
    std::string bytes;
    bytes.reserve(8 + 4 * labels.size());
    bytes += "LVEC";
    put_u32(bytes, static_cast<std::uint32_t>(labels.size()));
    for (ClassId id : labels) put_u32(bytes, id);
    spill(path, bytes);
}

std::vector<ClassId> read_labels(const std::string& path) {
    Reader r(slurp(path), path);
    r.expect_magic("LVEC");
    const std::uint32_t count = r.u32();
    std::vector<ClassId> labels(count);
    for (auto& id : labels) id = r.u32();
    r.done();
    return labels;
}

DenseMatrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::vector<double> entries;
    index_t cols = 0, rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        index_t row_cols = 0;
        while (std::getline(row, cell, ',')) {
            try {
                std::size_t used = 0;
                const double v = std::stod(cell, &used);
                while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
                    ++used;
                if (used != cell.size()) throw std::invalid_argument(cell);
                entries.push_back(v);
            } catch (const std::exception&) {
                throw MalformedValue(path + ": bad numeric cell \"" + cell + "\"");
            }
            ++row_cols;
        }
        if (rows == 0) {
            cols = row_cols;
        } else if (row_cols != cols) {
            throw MalformedValue(path + ": ragged CSV rows");
        }
        ++rows;
    }
    DenseMatrix m(rows, cols, std::move(entries));
    if (!numerics::all_finite(m)) throw NonFiniteValue(path + ": non-finite CSV entry");
    return m;
}

void save_model(const std::string& path, const rpl::RplModel& model) {
    std::string bytes;
    bytes += "RPLM";
    put_u32(bytes, static_cast<std::uint32_t>(model.feature_dim()));
    put_u32(bytes, static_cast<std::uint32_t>(model.activation()));
    put_u32(bytes, static_cast<std::uint32_t>(model.blocks().size()));
    for (const auto& block : model.blocks()) {
        put_u32(bytes, static_cast<std::uint32_t>(block.units()));
        put_f64(bytes, block.xi());
        for (double v : block.input_weights().data()) put_f64(bytes, v);
        for (double b : block.biases()) put_f64(bytes, b);
    }
    spill(path, bytes);
}

rpl::RplModel load_model(const std::string& path) {
    Reader r(slurp(path), path);
    r.expect_magic("RPLM");
    const std::uint32_t d = r.u32();
    const std::uint32_t activation = r.u32();
    if (activation != static_cast<std::uint32_t>(rpl::Activation::Sigmoid)) {
        throw MalformedValue(path + ": unknown activation tag");
    }
    const std::uint32_t block_count = r.u32();
    rpl::RplModel model(d);
    for (std::uint32_t b = 0; b < block_count; ++b) {
        const std::uint32_t s = r.u32();
        const double xi = r.f64();
        std::vector<double> weights(static_cast<std::size_t>(d) * s);
        for (auto& v : weights) v = r.f64();
        std::vector<double> biases(s);
        for (auto& v : biases) v = r.f64();
        model.append(rpl::BasisBlock(DenseMatrix(d, s, std::move(weights)),
                                     std::move(biases), xi));
    }
    r.done();
    return model;
}

// --- synthetic data ----------------------------------------------------------

void SyntheticSpec::validate() const {
    if (classes == 0 || train_per_class == 0 || test_per_class == 0 || feature_dim == 0 ||
        classes_per_task == 0) {
        throw MalformedValue("SyntheticSpec: counts must be >= 1");
    }
    if (cluster_spread < 0.0 || domain_gap < 0.0) {
        throw MalformedValue("SyntheticSpec: spreads must be >= 0");
    }
    if (redundancy >= feature_dim) {
        throw MalformedValue("SyntheticSpec: redundancy must be < feature_dim");
    }
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    rpl::GaussianSampler rng(spec.seed);

    const index_t base_dim = spec.feature_dim - spec.redundancy;

    // Shared drift direction (unit vector) and per-class means in the
    // non-redundant subspace.
    std::vector<double> drift(base_dim);
    double drift_norm = 0.0;
    for (auto& v : drift) {
        v = rng.next(1.0);
        drift_norm += v * v;
    }
    drift_norm = std::sqrt(drift_norm);
    for (auto& v : drift) v /= drift_norm > 0.0 ? drift_norm : 1.0;

    DenseMatrix means(spec.classes, base_dim);
    for (index_t c = 0; c < spec.classes; ++c) {
        const double shift = spec.domain_gap * static_cast<double>(c / spec.classes_per_task);
        for (index_t j = 0; j < base_dim; ++j) {
            means(c, j) = rng.next(1.0) + shift * drift[j];
        }
    }

    auto fill = [&](index_t per_class) {
        LabeledSet set;
        set.features = DenseMatrix(per_class * spec.classes, spec.feature_dim);
        set.labels.reserve(per_class * spec.classes);
        for (index_t c = 0; c < spec.classes; ++c) {
            for (index_t i = 0; i < per_class; ++i) {
                const index_t row = c * per_class + i;
                for (index_t j = 0; j < base_dim; ++j) {
                    set.features(row, j) = means(c, j) + rng.next(spec.cluster_spread);
                }
                // Redundant dims: exact copies of earlier dims plus tiny jitter,
                // reproducing the collinearity pathology of unguided features.
                for (index_t j = base_dim; j < spec.feature_dim; ++j) {
                    const index_t src = (j - base_dim) % base_dim;
                    set.features(row, j) = set.features(row, src) + 1e-6 * rng.next(1.0);
                }
                set.labels.push_back(static_cast<ClassId>(c));
            }
        }
        return set;
    };

    SyntheticData data;
    data.train = fill(spec.train_per_class);
    data.test = fill(spec.test_per_class);
    return data;
}

// --- task splitting ----------------------------------------------------------

namespace {

std::vector<ClassId> distinct_sorted_classes(const LabeledSet& set) {
    std::vector<ClassId> ids(set.labels.begin(), set.labels.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

TaskBatch gather(const LabeledSet& set, const std::vector<ClassId>& wanted,
                 std::size_t task_index) {
    std::vector<index_t> rows;
    for (index_t i = 0; i < set.labels.size(); ++i) {
        if (std::find(wanted.begin(), wanted.end(), set.labels[i]) != wanted.end()) {
            rows.push_back(i);
        }
    }
    TaskBatch batch;
    batch.task_index = task_index;
    batch.features = DenseMatrix(rows.size(), set.features.cols());
    batch.labels.reserve(rows.size());
    for (index_t r = 0; r < rows.size(); ++r) {
        for (index_t j = 0; j < set.features.cols(); ++j) {
            batch.features(r, j) = set.features(rows[r], j);
        }
        batch.labels.push_back(set.labels[rows[r]]);
    }
    batch.validate();
    return batch;
}

}  // namespace

TaskSplit split_tasks(const LabeledSet& train, const LabeledSet& test, index_t m,
                      index_t n, std::uint64_t seed) {
    if (train.labels.size() != train.features.rows() ||
        test.labels.size() != test.features.rows()) {
        throw DimensionError("split_tasks: one label per sample");
    }
    if (n == 0) throw IndivisibleSplit("split_tasks: increment must be >= 1");

    std::vector<ClassId> classes = distinct_sorted_classes(train);
    const index_t c = classes.size();
    if (m > c) throw IndivisibleSplit("split_tasks: more initial classes than classes");
    const index_t remaining = c - (m == 0 ? 0 : m);
    if (remaining % n != 0) {
        std::ostringstream msg;
        msg << "split_tasks: cannot split " << c << " classes as B-" << m << " Inc-" << n;
        throw IndivisibleSplit(msg.str());
    }

    // Seeded permutation decides which classes land in which task.
    std::mt19937_64 rng(seed);
    std::shuffle(classes.begin(), classes.end(), rng);

    std::vector<std::vector<ClassId>> per_task;
    index_t cursor = 0;
    if (m > 0) {
        per_task.emplace_back(classes.begin(), classes.begin() + m);
        cursor = m;
    }
    while (cursor < c) {
        per_task.emplace_back(classes.begin() + cursor, classes.begin() + cursor + n);
        cursor += n;
    }

    TaskSplit split;
    {
        std::ostringstream tag;
        tag << "B-" << m << " Inc-" << n;
        split.protocol = tag.str();
    }
    for (std::size_t t = 0; t < per_task.size(); ++t) {
        split.train.push_back(gather(train, per_task[t], t + 1));
        split.test.push_back(gather(test, per_task[t], t + 1));
    }
    return split;
}

// --- configuration -----------------------------------------------------------

namespace {

// Shared `key = value` reader; '#' starts a comment, blank lines ignored.
std::map<std::string, std::string> read_kv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    auto trim = [](std::string s) {
        const auto from = s.find_first_not_of(" \t\r");
        const auto to = s.find_last_not_of(" \t\r");
        return from == std::string::npos ? std::string() : s.substr(from, to - from + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream msg;
            msg << path << ":" << line_no << ": expected `key = value`";
            throw MalformedValue(msg.str());
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            std::ostringstream msg;
            msg << path << ":" << line_no << ": empty key or value";
            throw MalformedValue(msg.str());
        }
        kv[key] = value;
    }
    return kv;
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size() || !std::isfinite(v)) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw MalformedValue(key + ": not a finite real: \"" + value + "\"");
    }
}

std::uint64_t parse_count(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw MalformedValue(key + ": not a nonnegative integer: \"" + value + "\"");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw MalformedValue(key + ": not a boolean: \"" + value + "\"");
}

[[noreturn]] void unknown_key(const std::string& path, const std::string& key) {
    throw UnknownKey(path + ": unknown key \"" + key + "\"");
}

}  // namespace

supervisory::ConstructionConfig RunConfig::construction(supervisory::Strategy strategy) const {
    supervisory::ConstructionConfig cfg;
    cfg.r = r;
    cfg.epsilon = epsilon;
    cfg.lambda = lambda;
    cfg.s = s;
    cfg.b_max = b_max;
    cfg.xi_schedule = rpl::XiSchedule(xi_min, delta_xi, xi_max);
    cfg.max_units = max_units;
    cfg.strategy = strategy;
    cfg.per_column_criterion = per_column_criterion;
    cfg.ri_xi = ri_xi;
    cfg.validate();
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    RunConfig cfg;
    for (const auto& [key, value] : read_kv(path)) {
        if (key == "r") {
            cfg.r = parse_real(key, value);
            if (!(cfg.r > 0.0 && cfg.r < 1.0)) {
                throw MalformedValue("r: must be in (0,1), got " + value);
            }
        } else if (key == "epsilon") {
            cfg.epsilon = parse_real(key, value);
            if (!(cfg.epsilon > 0.0)) throw MalformedValue("epsilon: must be positive");
        } else if (key == "lambda") {
            cfg.lambda = parse_real(key, value);
            if (!(cfg.lambda > 0.0)) throw MalformedValue("lambda: must be positive");
        } else if (key == "s") {
            cfg.s = parse_count(key, value);
            if (cfg.s == 0) throw MalformedValue("s: must be >= 1");
        } else if (key == "b_max") {
            cfg.b_max = parse_count(key, value);
            if (cfg.b_max == 0) throw MalformedValue("b_max: must be >= 1");
        } else if (key == "xi_min") {
            cfg.xi_min = parse_real(key, value);
        } else if (key == "delta_xi") {
            cfg.delta_xi = parse_real(key, value);
        } else if (key == "xi_max") {
            cfg.xi_max = parse_real(key, value);
        } else if (key == "max_units") {
            cfg.max_units = parse_count(key, value);
        } else if (key == "ri_xi") {
            cfg.ri_xi = parse_real(key, value);
            if (!(cfg.ri_xi > 0.0)) throw MalformedValue("ri_xi: must be positive");
        } else if (key == "per_column_criterion") {
            cfg.per_column_criterion = parse_bool(key, value);
        } else {
            unknown_key(path, key);
        }
    }
    // Schedule consistency is validated on construction.
    rpl::XiSchedule(cfg.xi_min, cfg.delta_xi, cfg.xi_max);
    return cfg;
}

SyntheticSpec parse_synthetic_spec(const std::string& path) {
    SyntheticSpec spec;
    for (const auto& [key, value] : read_kv(path)) {
        if (key == "classes") {
            spec.classes = parse_count(key, value);
        } else if (key == "train_per_class") {
            spec.train_per_class = parse_count(key, value);
        } else if (key == "test_per_class") {
            spec.test_per_class = parse_count(key, value);
        } else if (key == "feature_dim") {
            spec.feature_dim = parse_count(key, value);
        } else if (key == "cluster_spread") {
            spec.cluster_spread = parse_real(key, value);
        } else if (key == "domain_gap") {
            spec.domain_gap = parse_real(key, value);
        } else if (key == "redundancy") {
            spec.redundancy = parse_count(key, value);
        } else if (key == "classes_per_task") {
            spec.classes_per_task = parse_count(key, value);
        } else if (key == "seed") {
            spec.seed = parse_count(key, value);
        } else {
            unknown_key(path, key);
        }
    }
    spec.validate();
    return spec;
}

}  // namespace rpcl::io
