#include "ictm/io.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ictm {

namespace fs = std::filesystem;

SnapshotFormat parse_snapshot_format(std::string_view s) {
    if (s == "vtk" || s == "vtk_structured_points") return SnapshotFormat::vtk_structured_points;
    if (s == "raw" || s == "raw_with_header") return SnapshotFormat::raw_with_header;
    throw std::invalid_argument("unknown snapshot format '" + std::string(s) +
                                "' (expected vtk_structured_points|raw_with_header)");
}

std::string_view to_string(SnapshotFormat f) {
    return f == SnapshotFormat::vtk_structured_points ? "vtk_structured_points"
                                                      : "raw_with_header";
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
T parse_number(std::string_view s, std::string_view key) {
    s = trim(s);
    T v{};
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::invalid_argument("invalid value '" + std::string(s) + "' for " +
                                    std::string(key));
    return v;
}

template <typename T>
std::vector<T> parse_list(std::string_view s, std::string_view key) {
    std::vector<T> out;
    for (auto part : split(s, ',')) out.push_back(parse_number<T>(part, key));
    if (out.empty()) throw std::invalid_argument("empty list for " + std::string(key));
    return out;
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

GridSpec CaseSpec::grid() const {
    const int dim = name == CaseName::volume_to_surface ? 3 : 2;
    std::vector<int> c = cells;
    if (c.empty()) c.assign(dim, dim == 3 ? 48 : 200);
    if (c.size() == 1) c.assign(dim, c.front());
    if (c.size() != static_cast<std::size_t>(dim))
        throw std::invalid_argument("case.cells needs 1 or " + std::to_string(dim) + " entries");
    return make_grid(dim, c);
}

ProblemCase CaseSpec::build() const { return make_case(name, grid(), materials, beta); }

bool SweepAxes::empty() const { return size() == 1 && kappa1.empty() && seed.empty() &&
                                       kappa2.empty() && q1.empty() && q2.empty() &&
                                       beta.empty() && gamma.empty() && tau.empty(); }

std::size_t SweepAxes::size() const {
    std::size_t n = 1;
    for (auto* axis : {&kappa1, &kappa2, &q1, &q2, &beta, &gamma, &tau})
        if (!axis->empty()) n *= axis->size();
    if (!seed.empty()) n *= seed.size();
    return n;
}

void RunManifest::validate() const {
    case_spec.materials.validate();
    if (!(case_spec.beta > 0.0 && case_spec.beta < 1.0))
        throw std::invalid_argument("case.beta must lie in (0,1)");
    (void)case_spec.build();
    ictm.validate();
    if (snapshot_every < 0) throw std::invalid_argument("output.snapshot_every must be >= 0");
    if (sweep.size() > sweep_cap)
        throw std::invalid_argument("sweep has " + std::to_string(sweep.size()) +
                                    " runs, above sweep.cap = " + std::to_string(sweep_cap));
    for (double v : sweep.kappa1)
        if (!(v > 0.0)) throw std::invalid_argument("sweep.kappa1 values must be > 0");
    for (double v : sweep.kappa2)
        if (!(v > 0.0)) throw std::invalid_argument("sweep.kappa2 values must be > 0");
    for (double v : sweep.beta)
        if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument("sweep.beta values must lie in (0,1)");
    for (double v : sweep.gamma)
        if (!(v >= 0.0)) throw std::invalid_argument("sweep.gamma values must be >= 0");
    for (double v : sweep.tau)
        if (!(v > 0.0)) throw std::invalid_argument("sweep.tau values must be > 0");
}

std::string RunManifest::describe() const {
    std::ostringstream s;
    const auto& m = case_spec.materials;
    const auto g = case_spec.grid();
    s << "case=" << to_string(case_spec.name) << " cells=" << g.cells(0);
    for (int a = 1; a < g.dim(); ++a) s << 'x' << g.cells(a);
    s << " kappa1=" << format_double(m.kappa1) << " kappa2=" << format_double(m.kappa2)
      << " q1=" << format_double(m.q1) << " q2=" << format_double(m.q2)
      << " beta=" << format_double(case_spec.beta) << " init=" << to_string(case_spec.init)
      << " gamma=" << format_double(ictm.gamma) << " tau=" << format_double(ictm.tau)
      << " xi=" << format_double(ictm.xi) << " theta=" << format_double(ictm.theta)
      << " variant=" << to_string(ictm.variant) << " seed=" << ictm.seed
      << " extension=" << to_string(ictm.extension);
    return s.str();
}

std::vector<RunManifest> RunManifest::expand() const {
    std::vector<RunManifest> runs{*this};
    runs.front().sweep = {};
    auto cross = [&runs](const auto& values, auto setter) {
        if (values.empty()) return;
        std::vector<RunManifest> next;
        for (const auto& r : runs)
            for (const auto& v : values) {
                RunManifest copy = r;
                setter(copy, v);
                next.push_back(std::move(copy));
            }
        runs = std::move(next);
    };
    cross(sweep.kappa1, [](RunManifest& r, double v) { r.case_spec.materials.kappa1 = v; });
    cross(sweep.kappa2, [](RunManifest& r, double v) { r.case_spec.materials.kappa2 = v; });
    cross(sweep.q1, [](RunManifest& r, double v) { r.case_spec.materials.q1 = v; });
    cross(sweep.q2, [](RunManifest& r, double v) { r.case_spec.materials.q2 = v; });
    cross(sweep.beta, [](RunManifest& r, double v) { r.case_spec.beta = v; });
    cross(sweep.gamma, [](RunManifest& r, double v) { r.ictm.gamma = v; });
    cross(sweep.tau, [](RunManifest& r, double v) { r.ictm.tau = v; });
    cross(sweep.seed, [](RunManifest& r, std::uint64_t v) { r.ictm.seed = v; });

    if (sweep.size() > 1 || !sweep.seed.empty()) {
        for (auto& r : runs) {
            char name[32];
            std::snprintf(name, sizeof name, "run-%016llx",
                          static_cast<unsigned long long>(fnv1a(r.describe())));
            r.output_dir = output_dir / name;
        }
    }
    return runs;
}

RunManifest parse_config(std::string_view text) {
    RunManifest m;
    using Setter = std::function<void(std::string_view, std::string_view)>;
    const std::map<std::string, Setter, std::less<>> setters = {
        {"case.name", [&](auto v, auto) { m.case_spec.name = parse_case_name(v); }},
        {"case.cells", [&](auto v, auto k) { m.case_spec.cells = parse_list<int>(v, k); }},
        {"case.kappa1", [&](auto v, auto k) { m.case_spec.materials.kappa1 = parse_number<double>(v, k); }},
        {"case.kappa2", [&](auto v, auto k) { m.case_spec.materials.kappa2 = parse_number<double>(v, k); }},
        {"case.q1", [&](auto v, auto k) { m.case_spec.materials.q1 = parse_number<double>(v, k); }},
        {"case.q2", [&](auto v, auto k) { m.case_spec.materials.q2 = parse_number<double>(v, k); }},
        {"case.beta", [&](auto v, auto k) { m.case_spec.beta = parse_number<double>(v, k); }},
        {"case.init", [&](auto v, auto) { m.case_spec.init = parse_init_kind(v); }},
        {"ictm.tau", [&](auto v, auto k) { m.ictm.tau = parse_number<double>(v, k); }},
        {"ictm.gamma", [&](auto v, auto k) { m.ictm.gamma = parse_number<double>(v, k); }},
        {"ictm.xi", [&](auto v, auto k) { m.ictm.xi = parse_number<double>(v, k); }},
        {"ictm.theta", [&](auto v, auto k) { m.ictm.theta = parse_number<double>(v, k); }},
        {"ictm.tol", [&](auto v, auto k) { m.ictm.tol = parse_number<double>(v, k); }},
        {"ictm.max_iters", [&](auto v, auto k) { m.ictm.max_outer_iters = parse_number<int>(v, k); }},
        {"ictm.variant", [&](auto v, auto) { m.ictm.variant = parse_variant(v); }},
        {"ictm.seed", [&](auto v, auto k) { m.ictm.seed = parse_number<std::uint64_t>(v, k); }},
        {"ictm.extension", [&](auto v, auto) { m.ictm.extension = parse_extension(v); }},
        {"solver.rel_tol", [&](auto v, auto k) { m.ictm.solver.rel_tol = parse_number<double>(v, k); }},
        {"solver.max_cg_iters", [&](auto v, auto k) { m.ictm.solver.max_cg_iters = parse_number<int>(v, k); }},
        {"solver.preconditioner", [&](auto v, auto) { m.ictm.solver.preconditioner = parse_preconditioner(v); }},
        {"output.dir", [&](auto v, auto) { m.output_dir = std::string(v); }},
        {"output.snapshot_every", [&](auto v, auto k) { m.snapshot_every = parse_number<int>(v, k); }},
        {"output.format", [&](auto v, auto) { m.snapshot_format = parse_snapshot_format(v); }},
        {"sweep.kappa1", [&](auto v, auto k) { m.sweep.kappa1 = parse_list<double>(v, k); }},
        {"sweep.kappa2", [&](auto v, auto k) { m.sweep.kappa2 = parse_list<double>(v, k); }},
        {"sweep.q1", [&](auto v, auto k) { m.sweep.q1 = parse_list<double>(v, k); }},
        {"sweep.q2", [&](auto v, auto k) { m.sweep.q2 = parse_list<double>(v, k); }},
        {"sweep.beta", [&](auto v, auto k) { m.sweep.beta = parse_list<double>(v, k); }},
        {"sweep.gamma", [&](auto v, auto k) { m.sweep.gamma = parse_list<double>(v, k); }},
        {"sweep.tau", [&](auto v, auto k) { m.sweep.tau = parse_list<double>(v, k); }},
        {"sweep.seed", [&](auto v, auto k) { m.sweep.seed = parse_list<std::uint64_t>(v, k); }},
        {"sweep.cap", [&](auto v, auto k) { m.sweep_cap = parse_number<std::size_t>(v, k); }},
    };

    std::set<std::string, std::less<>> seen;
    std::size_t line_no = 0;
    for (auto raw : split(text, '\n')) {
        ++line_no;
        auto line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument("line " + std::to_string(line_no) +
                                        ": expected 'section.key = value'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        auto it = setters.find(key);
        if (it == setters.end())
            throw std::invalid_argument("unknown configuration key '" + std::string(key) + "'");
        if (!seen.insert(std::string(key)).second)
            throw std::invalid_argument("configuration key '" + std::string(key) + "' given twice");
        if (value.empty())
            throw std::invalid_argument("missing value for " + std::string(key));
        it->second(value, key);
    }
    m.validate();
    return m;
}

RunManifest load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string format_log_row(const IterationRecord& r) {
    std::string s = std::to_string(r.k);
    s += ',' + format_double(r.J);
    s += ',' + format_double(r.J_tau);
    s += ',' + format_double(r.volume_fraction);
    s += ',' + std::to_string(r.flipped_nodes);
    s += ',' + std::to_string(r.correction_depth);
    s += ',' + std::to_string(r.wall_time_ms);
    return s;
}

IterationRecord parse_log_row(std::string_view line) {
    const auto f = split(trim(line), ',');
    if (f.size() != 7)
        throw std::invalid_argument("iteration log row needs 7 fields: '" + std::string(line) + "'");
    IterationRecord r;
    r.k = parse_number<int>(f[0], "k");
    r.J = parse_number<double>(f[1], "J");
    r.J_tau = parse_number<double>(f[2], "J_tau");
    r.volume_fraction = parse_number<double>(f[3], "volume_fraction");
    r.flipped_nodes = parse_number<std::size_t>(f[4], "flipped_nodes");
    r.correction_depth = parse_number<int>(f[5], "correction_depth");
    r.wall_time_ms = parse_number<std::int64_t>(f[6], "wall_time_ms");
    return r;
}

void write_iteration_log(const std::vector<IterationRecord>& records, const fs::path& path) {
    if (records.empty()) throw std::invalid_argument("iteration log needs at least one record");
    IterationLogWriter w(path);
    for (const auto& r : records) w.append(r);
}

std::vector<IterationRecord> read_iteration_log(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open iteration log " + path.string());
    std::string line;
    if (!std::getline(in, line) || trim(line) != kLogHeader)
        throw std::invalid_argument("iteration log " + path.string() + " has an unexpected header");
    std::vector<IterationRecord> out;
    while (std::getline(in, line))
        if (!trim(line).empty()) out.push_back(parse_log_row(line));
    return out;
}

IterationLogWriter::IterationLogWriter(const fs::path& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write iteration log " + path.string());
    out_ << kLogHeader << '\n';
    out_.flush();
}

void IterationLogWriter::append(const IterationRecord& r) {
    out_ << format_log_row(r) << '\n';
    out_.flush();
    if (!out_) throw std::runtime_error("write to iteration log failed");
}

namespace {

void write_snapshot(const GridSpec& g, std::span<const double> values, bool integral,
                    const fs::path& path, SnapshotFormat format, std::string_view name) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write snapshot " + path.string());
    auto value_text = [&](double v) {
        return integral ? std::to_string(static_cast<int>(v)) : format_double(v);
    };
    if (format == SnapshotFormat::raw_with_header) {
        out << g.dim();
        for (int a = 0; a < g.dim(); ++a) out << ' ' << g.cells(a);
        for (int a = 0; a < g.dim(); ++a) out << ' ' << format_double(g.h(a));
        out << '\n';
    } else {
        out << "# vtk DataFile Version 3.0\n"
            << name << '\n'
            << "ASCII\n"
            << "DATASET STRUCTURED_POINTS\n"
            << "DIMENSIONS " << g.nodes(0) << ' ' << g.nodes(1) << ' ' << g.nodes(2) << '\n'
            << "ORIGIN 0 0 0\n"
            << "SPACING " << format_double(g.h(0)) << ' ' << format_double(g.h(1)) << ' '
            << (g.dim() == 3 ? format_double(g.h(2)) : std::string("1")) << '\n'
            << "POINT_DATA " << g.node_count() << '\n'
            << "SCALARS " << name << ' ' << (integral ? "int" : "double") << " 1\n"
            << "LOOKUP_TABLE default\n";
    }
    for (double v : values) out << value_text(v) << '\n';
    if (!out) throw std::runtime_error("write to snapshot " + path.string() + " failed");
}

double snap_length(int cells, double h) {
    const double len = cells * h;
    const double r = std::round(len);
    return std::abs(len - r) <= 1e-12 * std::max(1.0, r) ? r : len;
}

}  // namespace

void write_field_snapshot(const ScalarField& field, const fs::path& path, SnapshotFormat format,
                          std::string_view name) {
    write_snapshot(field.grid(), field.values(), false, path, format, name);
}

void write_field_snapshot(const IndicatorField& field, const fs::path& path,
                          SnapshotFormat format, std::string_view name) {
    const auto v = field.as_real();
    write_snapshot(field.grid(), v, true, path, format, name);
}

ScalarField read_field_snapshot(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open snapshot " + path.string());
    std::string first;
    std::getline(in, first);
    GridSpec grid;
    if (first.rfind("# vtk", 0) == 0) {
        std::string line, word;
        std::array<int, 3> dims{1, 1, 1};
        std::array<double, 3> spacing{1, 1, 1};
        while (std::getline(in, line)) {
            std::istringstream ls(line);
            ls >> word;
            if (word == "DIMENSIONS") {
                ls >> dims[0] >> dims[1] >> dims[2];
            } else if (word == "SPACING") {
                std::string a, b, c;
                ls >> a >> b >> c;
                spacing = {parse_number<double>(a, "SPACING"), parse_number<double>(b, "SPACING"),
                           parse_number<double>(c, "SPACING")};
            } else if (word == "LOOKUP_TABLE") {
                break;
            }
        }
        const int dim = dims[2] > 1 ? 3 : 2;
        std::vector<int> cells;
        std::vector<double> lengths;
        for (int a = 0; a < dim; ++a) {
            cells.push_back(dims[a] - 1);
            lengths.push_back(snap_length(dims[a] - 1, spacing[a]));
        }
        grid = make_grid(dim, cells, lengths);
    } else {
        std::istringstream hs(first);
        int dim = 0;
        hs >> dim;
        if (dim != 2 && dim != 3) throw std::invalid_argument("bad raw snapshot header: " + first);
        std::vector<int> cells(dim);
        std::vector<double> lengths(dim);
        for (auto& c : cells) hs >> c;
        for (int a = 0; a < dim; ++a) {
            std::string h;
            hs >> h;
            lengths[a] = snap_length(cells[a], parse_number<double>(h, "h"));
        }
        if (!hs) throw std::invalid_argument("bad raw snapshot header: " + first);
        grid = make_grid(dim, cells, lengths);
    }
    std::vector<double> values;
    values.reserve(grid.node_count());
    std::string tok;
    while (in >> tok) values.push_back(parse_number<double>(tok, "snapshot value"));
    if (values.size() != grid.node_count())
        throw std::invalid_argument("snapshot " + path.string() + " has " +
                                    std::to_string(values.size()) + " values, expected " +
                                    std::to_string(grid.node_count()));
    return ScalarField(grid, std::move(values));
}

IndicatorField to_indicator(const ScalarField& f) {
    std::vector<std::uint8_t> v(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] != 0.0 && f[i] != 1.0)
            throw std::invalid_argument("field is not binary");
        v[i] = f[i] == 1.0;
    }
    return IndicatorField(f.grid(), std::move(v));
}

}  // namespace ictm
