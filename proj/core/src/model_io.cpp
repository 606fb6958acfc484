#include <sstream>
#include <string>

#include "dlcov/csv.hpp"
#include "dlcov/error.hpp"
#include "dlcov/learner.hpp"

namespace dlcov {

namespace {

constexpr int kModelFormatVersion = 1;

void write_block(std::ostringstream& out, const char* name, const RMat& M) {
    out << '[' << name << "]\n";
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j) out << ',';
            out << format_double(M(i, j));
        }
        out << '\n';
    }
}

std::string optional_text(const std::optional<double>& v) { return v ? format_double(*v) : "auto"; }

std::optional<double> parse_optional(const std::string& s) {
    if (s == "auto") return std::nullopt;
    return parse_double(s);
}

}  // namespace

void save_model(const TrainedInterpolator& model, const std::filesystem::path& path) {
    const auto& h = model.hyper;
    std::ostringstream out;
    out << "# dlcov gaussian rbf interpolator\n"
        << "format_version = " << kModelFormatVersion << '\n'
        << "antennas = " << (model.dim() + 1) / 2 << '\n'
        << "n_centers = " << model.size() << '\n'
        << "dim = " << model.dim() << '\n'
        << "sigma = " << format_double(model.sigma) << '\n'
        << "theta = " << format_double(model.theta) << '\n'
        << "mu1 = " << format_double(h.mu1) << '\n'
        << "mu2 = " << format_double(h.mu2) << '\n'
        << "mu3 = " << format_double(h.mu3) << '\n'
        << "theta_param = " << optional_text(h.theta) << '\n'
        << "sigma_init = " << optional_text(h.sigma_init) << '\n'
        << "grid_lo = " << format_double(h.grid.lo) << '\n'
        << "grid_hi = " << format_double(h.grid.hi) << '\n'
        << "grid_points = " << h.grid.points << '\n'
        << "max_iter = " << h.max_iter << '\n'
        << "obj_tol = " << format_double(h.obj_tol) << '\n'
        << "jitter = " << format_double(h.jitter) << '\n'
        << "dataset_seed = " << model.dataset_seed << '\n';
    write_block(out, "centers", model.centers);
    write_block(out, "coeffs", model.coeffs);
    write_block(out, "embedding", model.embedding);
    write_text_file(path, out.str());
}

TrainedInterpolator load_model(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    std::string header;
    std::map<std::string, std::vector<std::vector<std::string>>> blocks;
    std::string current;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            current = line.substr(1, line.size() - 2);
            blocks[current];
            continue;
        }
        if (current.empty()) header += line + '\n';
        else blocks[current].push_back(split_csv_line(line));
    }
    const auto kv = parse_key_values(header);
    auto get = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw Error(ErrorCode::FormatError, "model header missing '" + key + "'");
        return it->second;
    };
    if (parse_int(get("format_version")) != kModelFormatVersion)
        throw Error(ErrorCode::FormatError, "unsupported model format version");

    const auto n = static_cast<Eigen::Index>(parse_int(get("n_centers")));
    const auto dim = static_cast<Eigen::Index>(parse_int(get("dim")));
    auto read_block = [&](const char* name) {
        auto it = blocks.find(name);
        if (it == blocks.end()) throw Error(ErrorCode::FormatError, std::string("model missing block ") + name);
        const auto& rows = it->second;
        if (static_cast<Eigen::Index>(rows.size()) != n)
            throw Error(ErrorCode::FormatError, std::string("block ") + name + " has wrong row count");
        RMat M(n, dim);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (static_cast<Eigen::Index>(rows[i].size()) != dim)
                throw Error(ErrorCode::FormatError, std::string("block ") + name + " has wrong column count");
            for (Eigen::Index j = 0; j < dim; ++j) M(i, j) = parse_double(rows[i][j]);
        }
        return M;
    };

    TrainedInterpolator m;
    m.centers = read_block("centers");
    m.coeffs = read_block("coeffs");
    m.embedding = read_block("embedding");
    m.sigma = parse_double(get("sigma"));
    m.theta = parse_double(get("theta"));
    m.hyper.mu1 = parse_double(get("mu1"));
    m.hyper.mu2 = parse_double(get("mu2"));
    m.hyper.mu3 = parse_double(get("mu3"));
    m.hyper.theta = parse_optional(get("theta_param"));
    m.hyper.sigma_init = parse_optional(get("sigma_init"));
    m.hyper.grid.lo = parse_double(get("grid_lo"));
    m.hyper.grid.hi = parse_double(get("grid_hi"));
    m.hyper.grid.points = static_cast<int>(parse_int(get("grid_points")));
    m.hyper.max_iter = static_cast<int>(parse_int(get("max_iter")));
    m.hyper.obj_tol = parse_double(get("obj_tol"));
    m.hyper.jitter = parse_double(get("jitter"));
    m.dataset_seed = std::stoull(get("dataset_seed"));
    if (!(m.sigma > 0.0)) throw Error(ErrorCode::FormatError, "model sigma must be positive");
    return m;
}

}  // namespace dlcov
