#include <cmath>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dlcov/csv.hpp"
#include "dlcov/error.hpp"
#include "dlcov/experiment.hpp"

namespace dlcov {

namespace {

constexpr std::string_view kAxisNames[] = {"none", "n", "m", "snr", "mu-grid", "pilot-snr", "n-pilots"};

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    if (text.find_first_not_of(" \t") == std::string::npos) return out;
    for (const auto& item : split_csv_line(text)) {
        try {
            out.push_back(parse_double(item));
        } catch (const Error&) {
            config_error("'" + key + "': cannot parse list item '" + item + "'");
        }
    }
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_double(v[i]);
    }
    return out;
}

std::string style_name(PilotStyle s) { return s == PilotStyle::DftRows ? "dft" : "random-unitary"; }

PilotStyle parse_style(const std::string& s) {
    if (s == "dft") return PilotStyle::DftRows;
    if (s == "random-unitary") return PilotStyle::RandomUnitary;
    config_error("unknown pilot_style '" + s + "' (expected dft or random-unitary)");
}

class Reader {
public:
    explicit Reader(const boost::property_tree::ptree& tree) : tree_(tree) {}

    bool has(const std::string& section, const std::string& key) const {
        auto s = tree_.find(section);
        return s != tree_.not_found() && s->second.find(key) != s->second.not_found();
    }
    std::string text(const std::string& section, const std::string& key) const {
        used_.insert(section + "." + key);
        return tree_.get_child(section).get<std::string>(key);
    }
    double real(const std::string& section, const std::string& key, double& dst) const {
        if (!has(section, key)) return dst;
        try {
            dst = parse_double(text(section, key));
        } catch (const Error&) {
            config_error(section + "." + key + ": not a number");
        }
        return dst;
    }
    void integer(const std::string& section, const std::string& key, int& dst) const {
        if (!has(section, key)) return;
        try {
            dst = static_cast<int>(parse_int(text(section, key)));
        } catch (const Error&) {
            config_error(section + "." + key + ": not an integer");
        }
    }
    void optional(const std::string& section, const std::string& key, std::optional<double>& dst) const {
        if (!has(section, key)) return;
        const auto t = text(section, key);
        if (t == "auto") {
            dst.reset();
            return;
        }
        double v = 0.0;
        real(section, key, v);
        dst = v;
    }
    void check_all_used() const {
        static const std::set<std::string> sections{"array", "dataset", "model", "baseline", "sweep", "mmse"};
        for (const auto& [name, sec] : tree_) {
            if (!sections.count(name)) config_error("unknown section [" + name + "]");
            std::set<std::string> seen;
            for (const auto& [key, value] : sec) {
                if (!seen.insert(key).second) config_error("duplicate key " + name + "." + key);
                if (!used_.count(name + "." + key)) config_error("unknown key " + name + "." + key);
            }
        }
    }

private:
    const boost::property_tree::ptree& tree_;
    mutable std::set<std::string> used_;
};

}  // namespace

std::string_view to_string(SweepAxis axis) noexcept { return kAxisNames[static_cast<int>(axis)]; }

SweepAxis parse_sweep_axis(std::string_view s) {
    for (int i = 0; i < static_cast<int>(std::size(kAxisNames)); ++i)
        if (kAxisNames[i] == s) return static_cast<SweepAxis>(i);
    config_error("unknown sweep axis '" + std::string(s) + "'");
}

Hyperparams ExperimentConfig::noiseless_m256() {
    Hyperparams h;
    h.mu1 = 10.0;
    h.mu2 = 3e8;
    h.mu3 = 1e7;
    return h;
}

NoiseSpec ExperimentConfig::noise_for(int antennas, double snr) const {
    NoiseSpec n;
    n.snr_db = snr;
    n.n_ch = n_ch > 0 ? n_ch : 2 * antennas;
    return n;
}

DatasetOptions ExperimentConfig::dataset_options(int users) const {
    DatasetOptions o;
    o.n_users = users;
    o.split_ratio = split_ratio;
    o.spread_lo = deg_to_rad(spread_lo_deg);
    o.spread_hi = deg_to_rad(spread_hi_deg);
    o.family = family;
    o.scale_fraction = scale_fraction;
    return o;
}

void ExperimentConfig::validate() const {
    try {
        array.validate();
        hyper.validate();
        noise_for(array.antennas, snr_db).validate();
    } catch (const Error& e) {
        config_error(e.what());
    }
    if (n_users < 2) config_error("dataset.n_users must be >= 2");
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) config_error("dataset.split_ratio must lie in (0, 1)");
    if (!(spread_lo_deg > 0.0 && spread_lo_deg <= spread_hi_deg && spread_hi_deg < 90.0))
        config_error("dataset spreads must satisfy 0 < spread_lo_deg <= spread_hi_deg < 90");
    if (!(scale_fraction > 0.0)) config_error("dataset.scale_fraction must be > 0");
    if (n_ch < 0) config_error("dataset.n_ch must be >= 0");
    if (baseline.k < 1) config_error("baseline.k must be >= 1");
    if (!(baseline.bandwidth >= 0.0)) config_error("baseline.bandwidth must be >= 0");
    if (mmse.n_realizations < 1) config_error("mmse.n_realizations must be >= 1");
    if (!(mmse.total_power > 0.0)) config_error("mmse.total_power must be > 0");
    if (!std::isfinite(mmse.pilot_snr_db)) config_error("mmse.pilot_snr_db must be finite");
    for (double v : mmse.snr_values)
        if (!std::isfinite(v)) config_error("mmse.snr_values must be finite");
    const bool pilot_axis = axis == SweepAxis::PilotSnr || axis == SweepAxis::NumPilots;
    for (int p : mmse.pilot_values)
        if (p < 1 || (pilot_axis && p > array.antennas))
            config_error("mmse.pilot_values must lie in [1, antennas]");
    if (n_repeats < 1) config_error("sweep.n_repeats must be >= 1");

    auto need_values = [&] {
        if (values.empty()) config_error("sweep.values is empty for axis " + std::string(to_string(axis)));
    };
    auto need_integers = [&](double lo) {
        for (double v : values)
            if (v != std::floor(v) || v < lo) config_error("sweep.values must be integers >= " + format_double(lo));
    };
    switch (axis) {
        case SweepAxis::None:
            break;
        case SweepAxis::Users:
            need_values();
            need_integers(2);
            break;
        case SweepAxis::Antennas:
            need_values();
            need_integers(2);
            break;
        case SweepAxis::Snr:
            need_values();
            for (double v : values)
                if (std::isnan(v) || v == -INFINITY) config_error("sweep.values: SNR must be a number or inf");
            break;
        case SweepAxis::MuGrid:
            if (mu1_values.empty() || mu2_values.empty()) config_error("mu-grid axis needs mu1_values and mu2_values");
            for (double v : mu1_values)
                if (!(v >= 0.0 && std::isfinite(v))) config_error("sweep.mu1_values must be finite and >= 0");
            for (double v : mu2_values)
                if (!(v >= 0.0 && std::isfinite(v))) config_error("sweep.mu2_values must be finite and >= 0");
            break;
        case SweepAxis::PilotSnr:
            need_values();
            for (double v : values)
                if (!std::isfinite(v)) config_error("sweep.values: pilot SNR must be finite");
            break;
        case SweepAxis::NumPilots:
            need_values();
            need_integers(1);
            for (double v : values)
                if (v > array.antennas) config_error("sweep.values: pilot count exceeds antennas");
            break;
    }
}

namespace {

// Drops '#' and ';' comments, including trailing ones after a value.
std::string strip_comments(const std::string& text) {
    std::istringstream lines(text);
    std::string line, out;
    while (std::getline(lines, line)) {
        const auto cut = line.find_first_of("#;");
        if (cut != std::string::npos) line.erase(cut);
        out += line;
        out += '\n';
    }
    return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(strip_comments(text));
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        config_error(std::string("malformed config: ") + e.what());
    }
    for (const auto& [name, sec] : tree)
        if (sec.empty() && !sec.data().empty()) config_error("key '" + name + "' outside any section");

    Reader r(tree);
    ExperimentConfig c;

    // The preset goes first so individual keys can override it.
    if (r.has("model", "preset")) {
        const auto preset = r.text("model", "preset");
        if (preset == "noiseless-m256") c.hyper = ExperimentConfig::noiseless_m256();
        else if (preset != "default") config_error("unknown model.preset '" + preset + "'");
    }

    r.integer("array", "antennas", c.array.antennas);
    r.real("array", "f_ul", c.array.f_ul);
    r.real("array", "f_dl", c.array.f_dl);
    r.real("array", "spacing", c.array.spacing);

    r.integer("dataset", "n_users", c.n_users);
    r.real("dataset", "split_ratio", c.split_ratio);
    if (r.has("dataset", "pas_family")) {
        try {
            c.family = parse_pas_family(r.text("dataset", "pas_family"));
        } catch (const Error& e) {
            config_error(e.what());
        }
    }
    r.real("dataset", "spread_lo_deg", c.spread_lo_deg);
    r.real("dataset", "spread_hi_deg", c.spread_hi_deg);
    r.real("dataset", "scale_fraction", c.scale_fraction);
    r.real("dataset", "snr_db", c.snr_db);
    r.integer("dataset", "n_ch", c.n_ch);

    r.real("model", "mu1", c.hyper.mu1);
    r.real("model", "mu2", c.hyper.mu2);
    r.real("model", "mu3", c.hyper.mu3);
    r.optional("model", "theta", c.hyper.theta);
    r.optional("model", "sigma_init", c.hyper.sigma_init);
    r.real("model", "grid_lo", c.hyper.grid.lo);
    r.real("model", "grid_hi", c.hyper.grid.hi);
    r.integer("model", "grid_points", c.hyper.grid.points);
    r.integer("model", "max_iter", c.hyper.max_iter);
    r.real("model", "obj_tol", c.hyper.obj_tol);
    r.real("model", "jitter", c.hyper.jitter);

    r.integer("baseline", "k", c.baseline.k);
    r.real("baseline", "bandwidth", c.baseline.bandwidth);

    if (r.has("sweep", "axis")) c.axis = parse_sweep_axis(r.text("sweep", "axis"));
    if (r.has("sweep", "values")) c.values = parse_list("sweep.values", r.text("sweep", "values"));
    if (r.has("sweep", "mu1_values")) c.mu1_values = parse_list("sweep.mu1_values", r.text("sweep", "mu1_values"));
    if (r.has("sweep", "mu2_values")) c.mu2_values = parse_list("sweep.mu2_values", r.text("sweep", "mu2_values"));
    r.integer("sweep", "n_repeats", c.n_repeats);
    if (r.has("sweep", "seed")) {
        const auto t = r.text("sweep", "seed");
        try {
            std::size_t pos = 0;
            c.seed = std::stoull(t, &pos);
            if (pos != t.size()) throw std::invalid_argument(t);
        } catch (const std::exception&) {
            config_error("sweep.seed: not an unsigned 64-bit integer");
        }
    }

    r.integer("mmse", "n_realizations", c.mmse.n_realizations);
    r.real("mmse", "total_power", c.mmse.total_power);
    if (r.has("mmse", "pilot_style")) c.mmse.style = parse_style(r.text("mmse", "pilot_style"));
    r.real("mmse", "pilot_snr_db", c.mmse.pilot_snr_db);
    if (r.has("mmse", "snr_values")) c.mmse.snr_values = parse_list("mmse.snr_values", r.text("mmse", "snr_values"));
    if (r.has("mmse", "pilot_values")) {
        c.mmse.pilot_values.clear();
        for (double v : parse_list("mmse.pilot_values", r.text("mmse", "pilot_values"))) {
            if (v != std::floor(v)) config_error("mmse.pilot_values must be integers");
            c.mmse.pilot_values.push_back(static_cast<int>(v));
        }
    }

    r.check_all_used();
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

std::string to_ini(const ExperimentConfig& c) {
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("auto"); };
    std::vector<double> pilots(c.mmse.pilot_values.begin(), c.mmse.pilot_values.end());
    std::ostringstream o;
    o << "[array]\n"
      << "antennas = " << c.array.antennas << '\n'
      << "f_ul = " << format_double(c.array.f_ul) << '\n'
      << "f_dl = " << format_double(c.array.f_dl) << '\n'
      << "spacing = " << format_double(c.array.spacing) << "\n\n"
      << "[dataset]\n"
      << "n_users = " << c.n_users << '\n'
      << "split_ratio = " << format_double(c.split_ratio) << '\n'
      << "pas_family = " << to_string(c.family) << '\n'
      << "spread_lo_deg = " << format_double(c.spread_lo_deg) << '\n'
      << "spread_hi_deg = " << format_double(c.spread_hi_deg) << '\n'
      << "scale_fraction = " << format_double(c.scale_fraction) << '\n'
      << "snr_db = " << format_double(c.snr_db) << '\n'
      << "n_ch = " << c.n_ch << "\n\n"
      << "[model]\n"
      << "mu1 = " << format_double(c.hyper.mu1) << '\n'
      << "mu2 = " << format_double(c.hyper.mu2) << '\n'
      << "mu3 = " << format_double(c.hyper.mu3) << '\n'
      << "theta = " << opt(c.hyper.theta) << '\n'
      << "sigma_init = " << opt(c.hyper.sigma_init) << '\n'
      << "grid_lo = " << format_double(c.hyper.grid.lo) << '\n'
      << "grid_hi = " << format_double(c.hyper.grid.hi) << '\n'
      << "grid_points = " << c.hyper.grid.points << '\n'
      << "max_iter = " << c.hyper.max_iter << '\n'
      << "obj_tol = " << format_double(c.hyper.obj_tol) << '\n'
      << "jitter = " << format_double(c.hyper.jitter) << "\n\n"
      << "[baseline]\n"
      << "k = " << c.baseline.k << '\n'
      << "bandwidth = " << format_double(c.baseline.bandwidth) << "\n\n"
      << "[sweep]\n"
      << "axis = " << to_string(c.axis) << '\n'
      << "values = " << join(c.values) << '\n'
      << "mu1_values = " << join(c.mu1_values) << '\n'
      << "mu2_values = " << join(c.mu2_values) << '\n'
      << "n_repeats = " << c.n_repeats << '\n'
      << "seed = " << c.seed << "\n\n"
      << "[mmse]\n"
      << "n_realizations = " << c.mmse.n_realizations << '\n'
      << "total_power = " << format_double(c.mmse.total_power) << '\n'
      << "pilot_style = " << style_name(c.mmse.style) << '\n'
      << "pilot_snr_db = " << format_double(c.mmse.pilot_snr_db) << '\n'
      << "snr_values = " << join(c.mmse.snr_values) << '\n'
      << "pilot_values = " << join(pilots) << '\n';
    return o.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace dlcov
