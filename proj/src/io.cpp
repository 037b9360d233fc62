#include "pmc/io.hpp"

#include <bit>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/version.hpp>
#include <fftw3.h>
#include <zlib.h>

#include "json.hpp"

namespace pmc {

namespace {

namespace pt = boost::property_tree;
using json = nlohmann::json;

constexpr char kMagic[12] = {'P', 'M', 'C', 'L', 'O', 'S', 'U', 'R', 'E', 'T', 'R', 'J'};
constexpr size_t kPreamble = 16, kHeader = 40, kTrailer = 4;

void put_u64(std::string& b, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u32(std::string& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f64(std::string& b, double v) { put_u64(b, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(const std::string& b, size_t off) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(b[off + i])) << (8 * i);
    return v;
}
std::uint32_t get_u32(const std::string& b, size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(b[off + i])) << (8 * i);
    return v;
}
double get_f64(const std::string& b, size_t off) { return std::bit_cast<double>(get_u64(b, off)); }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::MissingInput, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& bytes, bool binary) {
    ensure_parent_dir(path);
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw Error(ErrorKind::MissingInput, "cannot write '" + path + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::MissingInput, "write failed for '" + path + "'");
}

void need(const std::string& b, size_t end, const std::string& path, const char* what) {
    if (b.size() < end)
        throw Error(ErrorKind::MissingInput, "'" + path + "' truncated at offset " + std::to_string(b.size()) +
                                                 " while reading " + what + " (need " + std::to_string(end) +
                                                 " bytes)");
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string num(cplx v, bool complex) {
    if (!complex) return num(v.real());
    return "(" + num(v.real()) + "," + num(v.imag()) + ")";
}

bool any_imag(const CVec& v) {
    for (auto x : v)
        if (x.imag() != 0.0) return true;
    return false;
}
bool any_imag(const CMat& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (m(i, j).imag() != 0.0) return true;
    return false;
}

std::string join(const CVec& v, bool complex) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        s += num(v[i], complex);
    }
    return s;
}

// INI document with the source line of every key, for diagnostics.
class Ini {
public:
    explicit Ini(const std::string& path) : path_(path) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorKind::MissingInput, "cannot open '" + path + "'");
        try {
            pt::read_ini(in, tree_);
        } catch (const pt::ini_parser_error& e) {
            throw Error(ErrorKind::Config, path + ":" + std::to_string(e.line()) + ": " + e.message());
        }
        in.clear();
        in.seekg(0);
        std::string line, section;
        int n = 0;
        while (std::getline(in, line)) {
            ++n;
            auto a = line.find_first_not_of(" \t");
            if (a == std::string::npos || line[a] == ';' || line[a] == '#') continue;
            if (line[a] == '[') {
                section = line.substr(a + 1, line.find(']') - a - 1);
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(a, eq - a);
            key.erase(key.find_last_not_of(" \t") + 1);
            lines_[section + "\n" + key] = n;
        }
    }

    [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& msg) const {
        auto it = lines_.find(section + "\n" + key);
        std::string where = path_;
        if (it != lines_.end()) where += ":" + std::to_string(it->second);
        throw Error(ErrorKind::Config, where + ": [" + section + "] " + key + ": " + msg);
    }

    bool has_section(const std::string& s) const { return tree_.find(s) != tree_.not_found(); }
    bool has(const std::string& s, const std::string& key) const {
        auto sec = tree_.find(s);
        return sec != tree_.not_found() && sec->second.find(key) != sec->second.not_found();
    }

    std::string raw(const std::string& s, const std::string& key) const {
        if (!has(s, key)) {
            std::string where = path_;
            if (has_section(s)) {
                auto it = lines_.lower_bound(s + "\n");
                if (it != lines_.end() && it->first.rfind(s + "\n", 0) == 0) where += ":" + std::to_string(it->second);
            }
            throw Error(ErrorKind::Config, where + ": missing key '" + key + "' in [" + s + "]");
        }
        return tree_.get_child(s).find(key)->second.data();
    }

    std::string str(const std::string& s, const std::string& key, const std::string& def) const {
        return has(s, key) ? raw(s, key) : def;
    }

    long integer(const std::string& s, const std::string& key) const {
        std::string v = raw(s, key);
        char* end = nullptr;
        long x = std::strtol(v.c_str(), &end, 10);
        if (end == v.c_str() || *end != '\0') fail(s, key, "expected an integer, got '" + v + "'");
        return x;
    }

    double real(const std::string& s, const std::string& key) const {
        std::string v = raw(s, key);
        char* end = nullptr;
        double x = std::strtod(v.c_str(), &end);
        if (end == v.c_str() || *end != '\0') fail(s, key, "expected a number, got '" + v + "'");
        return x;
    }

    std::vector<cplx> list(const std::string& s, const std::string& key) const {
        std::istringstream ls(raw(s, key));
        std::vector<cplx> out;
        std::string tok;
        while (ls >> tok) {
            std::istringstream ts(tok);
            cplx c;
            ts >> c;
            if (ts.fail() || ts.peek() != std::char_traits<char>::eof())
                fail(s, key, "bad number '" + tok + "' (use x or (x,y))");
            out.push_back(c);
        }
        return out;
    }

    CVec vec(const std::string& s, const std::string& key, int n) const {
        auto v = list(s, key);
        if (static_cast<int>(v.size()) != n)
            fail(s, key, "expected " + std::to_string(n) + " values, got " + std::to_string(v.size()));
        CVec out(n);
        for (int i = 0; i < n; ++i) out[i] = v[i];
        return out;
    }

    CMat rows(const std::string& s, int n) const {
        CMat M(n, n);
        for (int i = 0; i < n; ++i) M.row(i) = vec(s, "r" + std::to_string(i + 1), n).transpose();
        return M;
    }

    // Keys of a section in file order.
    std::vector<std::string> keys(const std::string& s) const {
        std::vector<std::string> k;
        if (!has_section(s)) return k;
        for (const auto& c : tree_.get_child(s)) k.push_back(c.first);
        return k;
    }

    int index(const std::string& s, const std::string& key, cplx v, int n) const {
        if (v.imag() != 0.0 || v.real() != std::floor(v.real())) fail(s, key, "index must be an integer");
        int i = static_cast<int>(v.real());
        if (i < 1 || i > n) fail(s, key, "index " + std::to_string(i) + " outside 1.." + std::to_string(n));
        return i - 1;
    }

private:
    std::string path_;
    pt::ptree tree_;
    std::map<std::string, int> lines_;
};

void rows_out(std::ostringstream& o, const std::string& name, const CMat& M, bool complex) {
    o << "\n[" << name << "]\n";
    for (Eigen::Index i = 0; i < M.rows(); ++i) o << "r" << i + 1 << " = " << join(M.row(i).transpose(), complex) << "\n";
}

}  // namespace

bool needs_complex(const Trajectory& traj) { return any_imag(traj.samples); }

void write_trajectory(const std::string& path, const Trajectory& traj, std::optional<bool> complex) {
    const bool cx = complex.value_or(needs_complex(traj));
    const int N = traj.dim(), K = traj.count();
    std::string b;
    b.reserve(kPreamble + kHeader + size_t(N) * K * (cx ? 16 : 8) + kTrailer);
    b.append(kMagic, sizeof kMagic);
    put_u32(b, kTrajectoryVersion);
    put_u64(b, static_cast<std::uint64_t>(N));
    put_f64(b, traj.dt);
    put_f64(b, traj.t0);
    put_u64(b, static_cast<std::uint64_t>(K));
    put_u64(b, cx ? kFlagComplex : 0);
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < N; ++i) {
            put_f64(b, traj.samples(i, k).real());
            if (cx) put_f64(b, traj.samples(i, k).imag());
        }
    put_u32(b, crc32_of(b));
    spit(path, b, true);
}

Trajectory read_trajectory(const std::string& path, std::optional<bool> expect_complex) {
    const std::string b = slurp(path);
    need(b, kPreamble, path, "magic");
    if (b.compare(0, sizeof kMagic, kMagic, sizeof kMagic) != 0)
        throw Error(ErrorKind::Format, "'" + path + "' is not a trajectory file");
    const std::uint32_t ver = get_u32(b, 12);
    if (ver != kTrajectoryVersion) throw Error(ErrorKind::Format, "unsupported trajectory version " + std::to_string(ver));
    need(b, kPreamble + kHeader, path, "header");
    size_t o = kPreamble;
    const std::uint64_t N = get_u64(b, o), K = get_u64(b, o + 24), flags = get_u64(b, o + 32);
    Trajectory t;
    t.dt = get_f64(b, o + 8);
    t.t0 = get_f64(b, o + 16);
    const bool cx = flags & kFlagComplex;
    if (expect_complex && *expect_complex != cx)
        throw Error(ErrorKind::Format, "'" + path + "' holds " + (cx ? "complex" : "real") + " samples, expected " +
                                           (*expect_complex ? "complex" : "real"));
    const size_t w = cx ? 16 : 8;
    if (N > (1u << 24) || (N && K > std::numeric_limits<size_t>::max() / (N * w)))
        throw Error(ErrorKind::Format, "'" + path + "' header is implausible");
    const size_t payload = N * K * w;
    need(b, kPreamble + kHeader + payload, path, "payload");
    need(b, kPreamble + kHeader + payload + kTrailer, path, "checksum");
    const size_t body = kPreamble + kHeader + payload;
    if (b.size() != body + kTrailer) throw Error(ErrorKind::Format, "'" + path + "' has trailing bytes");
    if (crc32_of(b.substr(0, body)) != get_u32(b, body))
        throw Error(ErrorKind::Format, "'" + path + "' checksum mismatch");
    t.samples.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(K));
    o = kPreamble + kHeader;
    for (std::uint64_t k = 0; k < K; ++k)
        for (std::uint64_t i = 0; i < N; ++i) {
            double re = get_f64(b, o), im = cx ? get_f64(b, o + 8) : 0.0;
            t.samples(i, k) = {re, im};
            o += w;
        }
    return t;
}

bool trajectory_is_complex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::MissingInput, "cannot open '" + path + "'");
    std::string b(kPreamble + kHeader, '\0');
    in.read(b.data(), static_cast<std::streamsize>(b.size()));
    b.resize(static_cast<size_t>(in.gcount()));
    need(b, kPreamble + kHeader, path, "header");
    return get_u64(b, kPreamble + 32) & kFlagComplex;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj, std::optional<bool> complex) {
    const bool cx = complex.value_or(needs_complex(traj));
    json h = {{"format", "pmc-trajectory"}, {"version", kTrajectoryVersion}, {"dim", traj.dim()},
              {"dt", traj.dt},               {"t0", traj.t0},                 {"count", traj.count()},
              {"complex", cx}};
    std::ostringstream o;
    o << "# " << h.dump() << "\n" << "t";
    for (int i = 1; i <= traj.dim(); ++i) {
        if (cx)
            o << ",re" << i << ",im" << i;
        else
            o << ",x" << i;
    }
    o << "\n";
    for (int k = 0; k < traj.count(); ++k) {
        o << num(traj.time(k));
        for (int i = 0; i < traj.dim(); ++i) {
            o << "," << num(traj.samples(i, k).real());
            if (cx) o << "," << num(traj.samples(i, k).imag());
        }
        o << "\n";
    }
    spit(path, o.str(), false);
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::MissingInput, "cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
        throw Error(ErrorKind::Format, path + ":1: missing '# {header}' line");
    json h;
    try {
        h = json::parse(line.substr(2));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Format, path + ":1: " + e.what());
    }
    Trajectory t;
    int N = 0, K = 0;
    bool cx = false;
    try {
        N = h.at("dim").get<int>();
        K = h.at("count").get<int>();
        cx = h.at("complex").get<bool>();
        t.dt = h.at("dt").get<double>();
        t.t0 = h.at("t0").get<double>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Format, path + ":1: " + e.what());
    }
    t.samples.resize(N, K);
    std::getline(in, line);  // column names
    const int cols = cx ? 2 * N : N;
    int k = 0, lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (k >= K) throw Error(ErrorKind::Format, path + ":" + std::to_string(lineno) + ": more rows than count");
        const char* p = line.c_str();
        char* end = nullptr;
        std::strtod(p, &end);  // time column
        std::vector<double> v;
        v.reserve(cols);
        while (*end == ',') {
            p = end + 1;
            v.push_back(std::strtod(p, &end));
            if (end == p) break;
        }
        if (static_cast<int>(v.size()) != cols || *end != '\0')
            throw Error(ErrorKind::Format, path + ":" + std::to_string(lineno) + ": expected " +
                                               std::to_string(cols) + " values");
        for (int i = 0; i < N; ++i) t.samples(i, k) = cx ? cplx(v[2 * i], v[2 * i + 1]) : cplx(v[i], 0.0);
        ++k;
    }
    if (k != K)
        throw Error(ErrorKind::MissingInput, "'" + path + "' truncated: " + std::to_string(k) + " of " +
                                                 std::to_string(K) + " rows");
    return t;
}

namespace {
bool is_csv(const std::string& path) { return std::filesystem::path(path).extension() == ".csv"; }
}  // namespace

Trajectory load_trajectory(const std::string& path) {
    return is_csv(path) ? read_trajectory_csv(path) : read_trajectory(path);
}

void save_trajectory(const std::string& path, const Trajectory& traj) {
    if (is_csv(path))
        write_trajectory_csv(path, traj);
    else
        write_trajectory(path, traj);
}

// ---- models ----

void write_model(const std::string& path, const QuadraticModel& m, const CVec* initial) {
    const bool cx = !m.is_real() || (initial && any_imag(*initial));
    std::ostringstream o;
    o << "[model]\ndim = " << m.dim << "\n";
    rows_out(o, "linear", m.linear, cx);
    o << "\n[bilinear]\n";
    int e = 0;
    for (const auto& b : m.bilinear)
        o << "e" << ++e << " = " << b.i + 1 << " " << b.j + 1 << " " << b.k + 1 << " " << num(b.value, cx) << "\n";
    if (!m.cubic.empty()) {
        o << "\n[cubic]\n";
        e = 0;
        for (const auto& c : m.cubic)
            o << "e" << ++e << " = " << c.i + 1 << " " << c.j + 1 << " " << c.l + 1 << " " << c.k + 1 << " "
              << num(c.value, cx) << "\n";
    }
    o << "\n[forcing]\nvalues = " << join(m.forcing, cx) << "\n";
    if (initial) o << "\n[initial]\nvalues = " << join(*initial, cx) << "\n";
    spit(path, o.str(), false);
}

QuadraticModel read_model(const std::string& path, CVec* initial) {
    Ini ini(path);
    const long n = ini.integer("model", "dim");
    if (n <= 0 || n > 100000) ini.fail("model", "dim", "must be in 1..100000");
    const int N = static_cast<int>(n);
    QuadraticModel m(N);
    m.linear = ini.rows("linear", N);
    for (const auto& key : ini.keys("bilinear")) {
        auto v = ini.list("bilinear", key);
        if (v.size() != 4) ini.fail("bilinear", key, "expected 'i j k value'");
        m.bilinear.push_back({ini.index("bilinear", key, v[0], N), ini.index("bilinear", key, v[1], N),
                              ini.index("bilinear", key, v[2], N), v[3]});
    }
    for (const auto& key : ini.keys("cubic")) {
        auto v = ini.list("cubic", key);
        if (v.size() != 5) ini.fail("cubic", key, "expected 'i j l k value'");
        m.cubic.push_back({ini.index("cubic", key, v[0], N), ini.index("cubic", key, v[1], N),
                           ini.index("cubic", key, v[2], N), ini.index("cubic", key, v[3], N), v[4]});
    }
    m.forcing = ini.has_section("forcing") ? ini.vec("forcing", "values", N) : CVec::Zero(N);
    if (initial && ini.has_section("initial")) *initial = ini.vec("initial", "values", N);
    m.validate();
    return m;
}

void write_eigen_model(const std::string& path, const EigenModel& m, const CVec* mean) {
    std::ostringstream o;
    o << "[eigen_model]\ndim = " << m.dim << "\ncutoff = " << m.cutoff << "\n";
    o << "\n[beta]\nvalues = " << join(m.beta, true) << "\n";
    o << "\n[forcing]\nvalues = " << join(m.forcing, true) << "\n";
    o << "\n[terms]\n";
    int e = 0;
    for (int n = 0; n < m.dim; ++n)
        for (const auto& t : m.terms[n])
            o << "e" << ++e << " = " << n + 1 << " " << t.k + 1 << " " << t.l + 1 << " " << num(t.value, true) << "\n";
    if (m.has_cubic()) {
        o << "\n[cubic]\n";
        e = 0;
        for (int n = 0; n < m.dim; ++n)
            for (const auto& t : m.cubic_terms[n])
                o << "e" << ++e << " = " << n + 1 << " " << t.i + 1 << " " << t.j + 1 << " " << t.l + 1 << " "
                  << num(t.value, true) << "\n";
    }
    if (mean) o << "\n[mean]\nvalues = " << join(*mean, any_imag(*mean)) << "\n";
    if (m.basis.has_vectors()) {
        rows_out(o, "basis_right", m.basis.right, true);
        rows_out(o, "basis_dual", m.basis.dual, true);
    }
    spit(path, o.str(), false);
}

EigenModel read_eigen_model(const std::string& path, CVec* mean) {
    Ini ini(path);
    const long n = ini.integer("eigen_model", "dim"), c = ini.integer("eigen_model", "cutoff");
    if (n <= 0 || n > 100000) ini.fail("eigen_model", "dim", "must be in 1..100000");
    if (c < 0 || c > n) ini.fail("eigen_model", "cutoff", "must be in 0..dim");
    const int N = static_cast<int>(n);
    EigenModel m;
    m.dim = N;
    m.cutoff = static_cast<int>(c);
    m.beta = ini.vec("beta", "values", N);
    m.forcing = ini.has_section("forcing") ? ini.vec("forcing", "values", N) : CVec::Zero(N);
    m.terms.assign(N, {});
    for (const auto& key : ini.keys("terms")) {
        auto v = ini.list("terms", key);
        if (v.size() != 4) ini.fail("terms", key, "expected 'n k l value'");
        m.terms[ini.index("terms", key, v[0], N)].push_back(
            {ini.index("terms", key, v[1], N), ini.index("terms", key, v[2], N), v[3]});
    }
    if (ini.has_section("cubic")) {
        m.cubic_terms.assign(N, {});
        for (const auto& key : ini.keys("cubic")) {
            auto v = ini.list("cubic", key);
            if (v.size() != 5) ini.fail("cubic", key, "expected 'n i j l value'");
            m.cubic_terms[ini.index("cubic", key, v[0], N)].push_back({ini.index("cubic", key, v[1], N),
                                                                      ini.index("cubic", key, v[2], N),
                                                                      ini.index("cubic", key, v[3], N), v[4]});
        }
    }
    if (mean && ini.has_section("mean")) *mean = ini.vec("mean", "values", N);
    m.basis.eigenvalues = m.beta;
    m.basis.cutoff = m.cutoff;
    if (ini.has_section("basis_right")) {
        m.basis.right = ini.rows("basis_right", N);
        m.basis.dual = ini.rows("basis_dual", N);
    }
    return m;
}

void write_parameterization(const std::string& path, const Parameterization& p, const std::string& eigen_model_path,
                            bool limit) {
    std::ostringstream o;
    o << "[parameterization]\nfamily = " << family_name(p.family) << "\ndim = " << p.dim << "\ncutoff = " << p.cutoff
      << "\nlimit = " << (limit ? "true" : "false") << "\neigen_model = " << eigen_model_path << "\ntaus =";
    for (double t : p.taus) o << " " << num(t);
    o << "\n";
    spit(path, o.str(), false);
}

ParameterizationFile read_parameterization_file(const std::string& path) {
    Ini ini(path);
    const std::string s = "parameterization";
    ParameterizationFile f;
    try {
        f.family = parse_family(ini.raw(s, "family"));
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Config || !ini.has(s, "family")) throw;
        ini.fail(s, "family", e.what());
    }
    f.dim = static_cast<int>(ini.integer(s, "dim"));
    f.cutoff = static_cast<int>(ini.integer(s, "cutoff"));
    if (f.dim <= 0) ini.fail(s, "dim", "must be positive");
    if (f.cutoff < 0 || f.cutoff > f.dim) ini.fail(s, "cutoff", "must be in 0..dim");
    const std::string lim = ini.str(s, "limit", "false");
    if (lim != "true" && lim != "false") ini.fail(s, "limit", "expected true or false");
    f.limit = lim == "true";
    f.eigen_model = ini.str(s, "eigen_model", "");
    if (ini.has(s, "taus")) {
        std::istringstream ls(ini.raw(s, "taus"));
        std::string tok;
        while (ls >> tok) {
            char* end = nullptr;
            double v = std::strtod(tok.c_str(), &end);
            if (*end != '\0' || !(v >= 0.0)) ini.fail(s, "taus", "bad tau '" + tok + "'");
            f.taus.push_back(v);
        }
    }
    if (!f.taus.empty() && static_cast<int>(f.taus.size()) != f.dim - f.cutoff)
        ini.fail(s, "taus", "expected " + std::to_string(f.dim - f.cutoff) + " values");
    return f;
}

Parameterization build_from_file(const ParameterizationFile& f, const EigenModel& model) {
    if (f.dim != model.dim || f.cutoff != model.cutoff)
        throw Error(ErrorKind::BasisMismatch, "parameterization is for dim " + std::to_string(f.dim) + ", cutoff " +
                                                  std::to_string(f.cutoff) + "; eigen model has " +
                                                  std::to_string(model.dim) + ", " + std::to_string(model.cutoff));
    if (f.limit) return qsa_limit_build(model);
    return family_build(f.family, model, f.taus);
}

// ---- misc ----

std::uint32_t crc32_of(const std::string& bytes) {
    uLong c = crc32(0L, Z_NULL, 0);
    size_t off = 0;
    while (off < bytes.size()) {
        const uInt len = static_cast<uInt>(std::min<size_t>(bytes.size() - off, 1u << 30));
        c = crc32(c, reinterpret_cast<const Bytef*>(bytes.data() + off), len);
        off += len;
    }
    return static_cast<std::uint32_t>(c);
}

std::string output_path(const std::string& path) {
    const char* root = std::getenv("PM_CLOSURE_DATA_DIR");
    if (!root || !*root || std::filesystem::path(path).is_absolute()) return path;
    return (std::filesystem::path(root) / path).string();
}

void ensure_parent_dir(const std::string& path) {
    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

std::string versions_json() {
    json v = {{"pmc", "1.0.0"},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"fftw", std::string(fftw_version)},
              {"zlib", zlibVersion()},
              {"boost", BOOST_LIB_VERSION},
              {"compiler", __VERSION__},
              {"cxx", static_cast<long>(__cplusplus)}};
    return v.dump();
}

void write_manifest(const std::string& path, const std::string& config_json, std::uint64_t seed,
                    const std::string& command_line) {
    json cfg = json::parse(config_json);
    const std::string canon = cfg.dump();
    char hash[16];
    std::snprintf(hash, sizeof hash, "%08x", crc32_of(canon));
    json m = {{"config", cfg},
              {"config_hash", std::string("crc32:") + hash},
              {"seed", seed},
              {"versions", json::parse(versions_json())},
              {"command", command_line}};
    spit(path, m.dump(2) + "\n", false);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
    if (header.size() != columns.size()) throw Error(ErrorKind::Config, "csv header/column count mismatch");
    size_t rows = 0;
    for (const auto& c : columns) rows = std::max(rows, c.size());
    std::ostringstream o;
    for (size_t j = 0; j < header.size(); ++j) o << (j ? "," : "") << header[j];
    o << "\n";
    for (size_t r = 0; r < rows; ++r) {
        for (size_t j = 0; j < columns.size(); ++j) {
            if (j) o << ",";
            if (r < columns[j].size()) o << num(columns[j][r]);
        }
        o << "\n";
    }
    spit(path, o.str(), false);
}

}  // namespace pmc
