#include "scto/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace scto {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << content;
}

std::uint64_t fnv1a_hash(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// ------------------------------------------------------------------ CSV

namespace {

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

}  // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << csv_quote(header[i]);
    }
    out << "\r\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << csv_quote(row[i]);
        }
        out << "\r\n";
    }
    write_text_file(path, out.str());
}

std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               std::vector<std::string>* header) {
    std::istringstream in(read_text_file(path));
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = csv_split(line);
        if (first) {
            first = false;
            if (header) *header = std::move(fields);
            continue;
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

void write_density_csv(const std::string& path, const GridDensity& f) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(f.n);
    for (int i = 0; i < f.n; ++i)
        rows.push_back({format_double(f.cell_mid(i)), format_double(f.values[i])});
    write_csv(path, {"x", "density"}, rows);
}

GridDensity read_density_csv(const std::string& path) {
    std::vector<std::string> header;
    auto rows = read_csv(path, &header);
    if (header.size() < 2 || header[0] != "x" || header[1] != "density")
        throw ConfigError("density csv: unexpected header in " + path);
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& row : rows) {
        if (row.size() < 2) throw ConfigError("density csv: short row in " + path);
        v.push_back(std::stod(row[1]));
    }
    const int n = static_cast<int>(v.size());
    return GridDensity(n, std::move(v), false);
}

// ---------------------------------------------------------------- binary

namespace {
constexpr char kMatrixMagic[8] = {'S', 'C', 'T', 'O', 'M', 'A', 'T', '1'};
constexpr std::uint32_t kColumnStochasticRowMajor = 1;
}  // namespace

void write_transfer_matrix(const std::string& path, const TransferMatrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + path);
    out.write(kMatrixMagic, 8);
    std::uint32_t n = static_cast<std::uint32_t>(m.n);
    std::uint32_t tag = kColumnStochasticRowMajor;
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&tag), 4);
    out.write(reinterpret_cast<const char*>(m.entries.data()),
              static_cast<std::streamsize>(m.entries.size() * sizeof(double)));
}

TransferMatrix read_transfer_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMatrixMagic, 8) != 0)
        throw ConfigError("matrix file: bad magic in " + path);
    std::uint32_t n = 0, tag = 0;
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&tag), 4);
    if (!in || tag != kColumnStochasticRowMajor)
        throw ConfigError("matrix file: unknown convention tag in " + path);
    std::vector<double> e(static_cast<std::size_t>(n) * n);
    in.read(reinterpret_cast<char*>(e.data()),
            static_cast<std::streamsize>(e.size() * sizeof(double)));
    if (!in) throw ConfigError("matrix file: truncated " + path);
    return TransferMatrix(static_cast<int>(n), std::move(e));
}

// ---------------------------------------------------------------- config

namespace {

void check_keys(const ordered_json& j, const std::vector<std::string>& allowed,
                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& k : allowed)
            if (it.key() == k) { ok = true; break; }
        if (!ok)
            throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
    }
}

template <class T>
void get_if(const ordered_json& j, const char* key, T& target) {
    if (j.contains(key)) {
        try {
            target = j.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("config: bad value for '") + key +
                              "': " + e.what());
        }
    }
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(j, {"command", "model", "solver", "output", "params"}, "top level");
    ExperimentConfig c;
    if (!j.contains("command"))
        throw ConfigError("config: missing 'command'");
    c.command = j.at("command").get<std::string>();

    if (!j.contains("model")) throw ConfigError("config: missing 'model' block");
    const auto& m = j.at("model");
    check_keys(m, {"class", "maps", "couplings", "mix_weights", "noise", "delta",
                   "delta_list", "grid_n"}, "model");
    get_if(m, "class", c.system_class);
    if (m.contains("maps")) {
        c.maps.clear();
        for (const auto& ms : m.at("maps")) {
            check_keys(ms, {"name", "param"}, "model.maps");
            MapSpec s;
            get_if(ms, "name", s.name);
            get_if(ms, "param", s.param);
            c.maps.push_back(std::move(s));
        }
    }
    if (m.contains("couplings")) {
        c.couplings.clear();
        for (const auto& cs : m.at("couplings")) {
            check_keys(cs, {"name", "table"}, "model.couplings");
            CouplingSpec s;
            get_if(cs, "name", s.name);
            get_if(cs, "table", s.table);
            c.couplings.push_back(std::move(s));
        }
    }
    get_if(m, "mix_weights", c.mix_weights);
    if (m.contains("noise")) {
        const auto& ns = m.at("noise");
        check_keys(ns, {"name", "param"}, "model.noise");
        get_if(ns, "name", c.noise.name);
        get_if(ns, "param", c.noise.param);
    }
    get_if(m, "delta", c.delta);
    get_if(m, "delta_list", c.delta_list);
    get_if(m, "grid_n", c.grid_n);

    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        check_keys(s, {"method", "tol", "max_iter", "damping", "alpha"}, "solver");
        get_if(s, "method", c.solver);
        get_if(s, "tol", c.tol);
        get_if(s, "max_iter", c.max_iter);
        get_if(s, "damping", c.damping);
        get_if(s, "alpha", c.alpha);
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        check_keys(o, {"dir", "svg", "seed", "threads"}, "output");
        get_if(o, "dir", c.out_dir);
        get_if(o, "svg", c.svg);
        get_if(o, "seed", c.seed);
        get_if(o, "threads", c.threads);
    }
    if (j.contains("params")) {
        const auto& p = j.at("params");
        check_keys(p, {"observable", "basis_degree", "weight_exponent", "constraint",
                       "radius", "box_bound", "particles", "burn_in", "sample_steps",
                       "rate_steps", "K", "Q", "C", "n1", "a_n1"}, "params");
        get_if(p, "observable", c.observable);
        get_if(p, "basis_degree", c.basis_degree);
        get_if(p, "weight_exponent", c.weight_exponent);
        get_if(p, "constraint", c.constraint);
        get_if(p, "radius", c.radius);
        get_if(p, "box_bound", c.box_bound);
        get_if(p, "particles", c.particles);
        get_if(p, "burn_in", c.burn_in);
        get_if(p, "sample_steps", c.sample_steps);
        get_if(p, "rate_steps", c.rate_steps);
        get_if(p, "K", c.K);
        get_if(p, "Q", c.Q);
        get_if(p, "C", c.C);
        get_if(p, "n1", c.n1);
        get_if(p, "a_n1", c.a_n1);
    }
    return c;
}

std::string serialize_config(const ExperimentConfig& c) {
    ordered_json j;
    j["command"] = c.command;
    ordered_json m;
    m["class"] = c.system_class;
    m["maps"] = ordered_json::array();
    for (const auto& s : c.maps)
        m["maps"].push_back(ordered_json{{"name", s.name}, {"param", s.param}});
    m["couplings"] = ordered_json::array();
    for (const auto& s : c.couplings)
        m["couplings"].push_back(ordered_json{{"name", s.name}, {"table", s.table}});
    m["mix_weights"] = c.mix_weights;
    m["noise"] = ordered_json{{"name", c.noise.name}, {"param", c.noise.param}};
    m["delta"] = c.delta;
    m["delta_list"] = c.delta_list;
    m["grid_n"] = c.grid_n;
    j["model"] = std::move(m);
    j["solver"] = ordered_json{{"method", c.solver}, {"tol", c.tol},
                               {"max_iter", c.max_iter}, {"damping", c.damping},
                               {"alpha", c.alpha}};
    j["output"] = ordered_json{{"dir", c.out_dir}, {"svg", c.svg},
                               {"seed", c.seed}, {"threads", c.threads}};
    j["params"] = ordered_json{
        {"observable", c.observable}, {"basis_degree", c.basis_degree},
        {"weight_exponent", c.weight_exponent}, {"constraint", c.constraint},
        {"radius", c.radius}, {"box_bound", c.box_bound},
        {"particles", c.particles}, {"burn_in", c.burn_in},
        {"sample_steps", c.sample_steps}, {"rate_steps", c.rate_steps},
        {"K", c.K}, {"Q", c.Q}, {"C", c.C}, {"n1", c.n1}, {"a_n1", c.a_n1}};
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------- model builder

CircleMap build_map(const MapSpec& spec) {
    if (spec.name == "doubling") return make_doubling_map();
    if (spec.name == "perturbed-doubling") return make_perturbed_doubling_map(spec.param);
    if (spec.name == "tent") return make_tent_map();
    if (spec.name == "rotation") return make_rotation_map(spec.param);
    if (spec.name == "identity") return make_identity_map();
    throw ConfigError("unknown map: " + spec.name);
}

CouplingKernel build_coupling(const CouplingSpec& spec) {
    if (spec.name == "sine-difference") return make_sine_difference_kernel();
    if (spec.name == "product-trig") return make_product_trig_kernel();
    if (spec.name == "cosy-sinx") return make_cosy_sinx_kernel();
    if (spec.name == "fourier-table") return make_fourier_table_kernel(spec.table);
    throw ConfigError("unknown coupling: " + spec.name);
}

std::optional<NoiseKernel> build_noise(const NoiseSpec& spec, int n) {
    if (spec.name.empty() || spec.name == "none") return std::nullopt;
    if (spec.name == "gaussian") return make_wrapped_gaussian(spec.param, n);
    if (spec.name == "raised-cosine") return make_raised_cosine(spec.param, n);
    if (spec.name == "grid-delta") return make_grid_delta(n);
    throw ConfigError("unknown noise kernel: " + spec.name);
}

SelfConsistentModel build_model(const ExperimentConfig& cfg) {
    SelfConsistentModel model;
    model.cls = parse_system_class(cfg.system_class);
    for (const auto& ms : cfg.maps) model.base_maps.push_back(build_map(ms));
    for (const auto& cs : cfg.couplings)
        model.couplings.push_back(build_coupling(cs));
    model.mix_weights = cfg.mix_weights;
    model.delta = cfg.delta;
    model.grid_n = cfg.grid_n;
    model.noise = build_noise(cfg.noise, cfg.grid_n);
    model.validate();
    return model;
}

std::vector<double> build_observable(const std::string& spec, int n) {
    auto colon = spec.find(':');
    std::string kind = spec.substr(0, colon);
    int k = 1;
    if (colon != std::string::npos) {
        try {
            k = std::stoi(spec.substr(colon + 1));
        } catch (...) {
            throw ConfigError("observable: bad frequency in '" + spec + "'");
        }
    }
    std::vector<double> v(n);
    if (kind == "cos") {
        for (int i = 0; i < n; ++i) v[i] = std::cos(kTwoPi * k * (i + 0.5) / n);
    } else if (kind == "sin") {
        for (int i = 0; i < n; ++i) v[i] = std::sin(kTwoPi * k * (i + 0.5) / n);
    } else if (kind == "identity") {
        for (int i = 0; i < n; ++i) v[i] = (i + 0.5) / n;
    } else {
        throw ConfigError("unknown observable: " + spec);
    }
    return v;
}

// ------------------------------------------------------------------- SVG

void write_svg_plot(const std::string& path, const std::vector<PlotSeries>& series,
                    const std::string& title) {
    const double W = 720, H = 440, ml = 60, mr = 20, mt = 40, mb = 40;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool any = false;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!any) {
                xmin = xmax = s.x[i];
                ymin = ymax = s.y[i];
                any = true;
            }
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b"};
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
        << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
        << "\" height=\"" << H - mt - mb
        << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << py(ymin)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << format_double(ymin) << "</text>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << py(ymax) + 10
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << format_double(ymax) << "</text>\n";
    int ci = 0;
    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << colors[ci % 6]
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            out << px(s.x[i]) << "," << py(s.y[i]) << " ";
        out << "\"/>\n";
        out << "<text x=\"" << W - mr - 8 << "\" y=\"" << mt + 16 + 16 * ci
            << "\" text-anchor=\"end\" fill=\"" << colors[ci % 6]
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label
            << "</text>\n";
        ++ci;
    }
    out << "</svg>\n";
    write_text_file(path, out.str());
}

}  // namespace scto
