#include <sstream>
#include <string>

#include "dlcov/csv.hpp"
#include "dlcov/dataset.hpp"
#include "dlcov/error.hpp"

namespace dlcov {

namespace {

constexpr int kDatasetFormatVersion = 1;

void write_row(std::ostringstream& out, int user, Link link, const char* kind, const FeatureVector& v) {
    out << user << ',' << to_string(link) << ',' << kind;
    for (Eigen::Index i = 0; i < v.values.size(); ++i) out << ',' << format_double(v.values[i]);
    out << '\n';
}

std::string feature_table(const std::vector<UserSample>& users, int dim) {
    std::ostringstream out;
    out << "user_id,link,kind";
    for (int i = 0; i < dim; ++i) out << ",v" << i;
    out << '\n';
    for (const auto& u : users) {
        write_row(out, u.user_id, Link::Uplink, "true", u.ul_true);
        write_row(out, u.user_id, Link::Uplink, "observed", u.ul_observed);
        write_row(out, u.user_id, Link::Downlink, "true", u.dl_true);
        if (u.dl_observed) write_row(out, u.user_id, Link::Downlink, "observed", *u.dl_observed);
    }
    return out.str();
}

const std::string& require(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorCode::FormatError, "dataset metadata missing '" + key + "'");
    return it->second;
}

std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    std::vector<std::vector<std::string>> rows;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        rows.push_back(split_csv_line(line));
    }
    return rows;
}

void load_features(const std::filesystem::path& path, std::vector<UserSample>& users, int dim) {
    std::map<int, std::size_t> index;
    for (std::size_t i = 0; i < users.size(); ++i) index[users[i].user_id] = i;
    for (const auto& row : read_table(path)) {
        if (static_cast<int>(row.size()) != dim + 3)
            throw Error(ErrorCode::FormatError, path.string() + ": wrong column count");
        const int user = static_cast<int>(parse_int(row[0]));
        auto it = index.find(user);
        if (it == index.end()) throw Error(ErrorCode::FormatError, "unknown user id " + row[0]);
        FeatureVector v{RVec(dim)};
        for (int i = 0; i < dim; ++i) v.values[i] = parse_double(row[3 + i]);
        auto& u = users[it->second];
        const Link link = parse_link(row[1]);
        const std::string& kind = row[2];
        if (link == Link::Uplink && kind == "true") u.ul_true = std::move(v);
        else if (link == Link::Uplink && kind == "observed") u.ul_observed = std::move(v);
        else if (link == Link::Downlink && kind == "true") u.dl_true = std::move(v);
        else if (link == Link::Downlink && kind == "observed") u.dl_observed = std::move(v);
        else throw Error(ErrorCode::FormatError, "unknown kind '" + kind + "'");
    }
}

}  // namespace

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ostringstream meta;
    meta << "# downlink covariance dataset\n"
         << "format_version = " << kDatasetFormatVersion << '\n'
         << "antennas = " << ds.cfg.antennas << '\n'
         << "f_ul = " << format_double(ds.cfg.f_ul) << '\n'
         << "f_dl = " << format_double(ds.cfg.f_dl) << '\n'
         << "spacing = " << format_double(ds.cfg.spacing) << '\n'
         << "snr_db = " << format_double(ds.noise.snr_db) << '\n'
         << "n_ch = " << ds.noise.n_ch << '\n'
         << "pas_family = " << to_string(ds.family) << '\n'
         << "split_ratio = " << format_double(ds.split_ratio) << '\n'
         << "spread_lo = " << format_double(ds.spread_lo) << '\n'
         << "spread_hi = " << format_double(ds.spread_hi) << '\n'
         << "seed = " << ds.seed << '\n'
         << "n_train = " << ds.train.size() << '\n'
         << "n_test = " << ds.test.size() << '\n';
    write_text_file(dir / "meta.txt", meta.str());

    std::ostringstream prof;
    prof << "user_id,split,family,mean_aoa,spread,scale\n";
    auto emit = [&](const std::vector<UserSample>& users, const char* split) {
        for (const auto& u : users)
            prof << u.user_id << ',' << split << ',' << to_string(u.profile.family) << ','
                 << format_double(u.profile.mean_aoa) << ',' << format_double(u.profile.spread) << ','
                 << format_double(u.profile.scale) << '\n';
    };
    emit(ds.train, "train");
    emit(ds.test, "test");
    write_text_file(dir / "profiles.csv", prof.str());

    const int dim = ds.cfg.feature_dim();
    write_text_file(dir / "train.csv", feature_table(ds.train, dim));
    write_text_file(dir / "test.csv", feature_table(ds.test, dim));
}

Dataset load_dataset(const std::filesystem::path& dir) {
    const auto kv = parse_key_values(read_text_file(dir / "meta.txt"));
    if (parse_int(require(kv, "format_version")) != kDatasetFormatVersion)
        throw Error(ErrorCode::FormatError, "unsupported dataset format version");
    Dataset ds;
    ds.cfg.antennas = static_cast<int>(parse_int(require(kv, "antennas")));
    ds.cfg.f_ul = parse_double(require(kv, "f_ul"));
    ds.cfg.f_dl = parse_double(require(kv, "f_dl"));
    ds.cfg.spacing = parse_double(require(kv, "spacing"));
    ds.cfg.validate();
    ds.noise.snr_db = parse_double(require(kv, "snr_db"));
    ds.noise.n_ch = static_cast<int>(parse_int(require(kv, "n_ch")));
    ds.family = parse_pas_family(require(kv, "pas_family"));
    ds.split_ratio = parse_double(require(kv, "split_ratio"));
    ds.spread_lo = parse_double(require(kv, "spread_lo"));
    ds.spread_hi = parse_double(require(kv, "spread_hi"));
    ds.seed = std::stoull(require(kv, "seed"));

    for (const auto& row : read_table(dir / "profiles.csv")) {
        if (row.size() != 6) throw Error(ErrorCode::FormatError, "profiles.csv: wrong column count");
        UserSample u;
        u.user_id = static_cast<int>(parse_int(row[0]));
        u.profile.family = parse_pas_family(row[2]);
        u.profile.mean_aoa = parse_double(row[3]);
        u.profile.spread = parse_double(row[4]);
        u.profile.scale = parse_double(row[5]);
        if (row[1] == "train") ds.train.push_back(std::move(u));
        else if (row[1] == "test") ds.test.push_back(std::move(u));
        else throw Error(ErrorCode::FormatError, "unknown split '" + row[1] + "'");
    }
    const int dim = ds.cfg.feature_dim();
    load_features(dir / "train.csv", ds.train, dim);
    load_features(dir / "test.csv", ds.test, dim);

    if (ds.train.size() != static_cast<std::size_t>(parse_int(require(kv, "n_train"))) ||
        ds.test.size() != static_cast<std::size_t>(parse_int(require(kv, "n_test"))))
        throw Error(ErrorCode::FormatError, "split sizes disagree with metadata");
    for (const auto& u : ds.train)
        if (!u.dl_observed) throw Error(ErrorCode::FormatError, "training user lacks DL observation");
    return ds;
}

}  // namespace dlcov
