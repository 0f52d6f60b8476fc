#include "tensorank/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace tensorank::io {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
    throw std::runtime_error(path.string() + ": " + what);
}

std::uint32_t read_u32(std::istream& is) {
    unsigned char buf[4];
    is.read(reinterpret_cast<char*>(buf), 4);
    return std::uint32_t(buf[0]) | std::uint32_t(buf[1]) << 8 | std::uint32_t(buf[2]) << 16 |
           std::uint32_t(buf[3]) << 24;
}

void write_u32(std::ostream& os, std::uint32_t v) {
    const unsigned char buf[4] = {
        (unsigned char)(v & 0xff),
        (unsigned char)(v >> 8 & 0xff),
        (unsigned char)(v >> 16 & 0xff),
        (unsigned char)(v >> 24 & 0xff),
    };
    os.write(reinterpret_cast<const char*>(buf), 4);
}

Matrix matrix_from_rows(const json& rows, const char* name) {
    if (!rows.is_array() || rows.empty())
        throw std::runtime_error(std::string("factors: ") + name +
                                 " must be a nonempty array of rows");
    const size_t cols = rows[0].size();
    Matrix m(rows.size(), cols);
    for (size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].is_array() || rows[i].size() != cols)
            throw std::runtime_error(std::string("factors: ragged rows in ") + name);
        for (size_t c = 0; c < cols; ++c)
            m(Index(i), Index(c)) = rows[i][c].get<double>();
    }
    return m;
}

json matrix_rows(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index c = 0; c < m.cols(); ++c)
            row.push_back(m(i, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_tns3(const std::filesystem::path& path, const Tensor3& t) {
    t.require_finite();
    std::ofstream os(path, std::ios::binary);
    if (!os)
        fail(path, "cannot open for writing");
    os.write("TNS3", 4);
    write_u32(os, std::uint32_t(t.extent0()));
    write_u32(os, std::uint32_t(t.extent1()));
    write_u32(os, std::uint32_t(t.extent2()));
    static_assert(sizeof(double) == 8);
    os.write(reinterpret_cast<const char*>(t.data().data()),
             std::streamsize(t.size()) * 8);
    if (!os)
        fail(path, "write failed");
}

Tensor3 read_tns3(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        fail(path, "cannot open");
    char magic[4] = {};
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "TNS3", 4) != 0)
        fail(path, "bad magic, not a TNS3 file");
    const Index i = read_u32(is), j = read_u32(is), k = read_u32(is);
    if (!is || i < 1 || j < 1 || k < 1)
        fail(path, "bad extents in header");
    Vector data(i * j * k);
    is.read(reinterpret_cast<char*>(data.data()), std::streamsize(data.size()) * 8);
    if (!is || is.gcount() != std::streamsize(data.size()) * 8)
        fail(path, "truncated payload");
    is.peek();
    if (!is.eof())
        fail(path, "trailing bytes after payload");
    try {
        return Tensor3::from_data(i, j, k, std::move(data));
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
}

nlohmann::json tensor_to_json(const Tensor3& t) {
    json j;
    j["dims"] = {t.extent0(), t.extent1(), t.extent2()};
    j["data"] = std::vector<double>(t.data().data(), t.data().data() + t.size());
    return j;
}

Tensor3 tensor_from_json(const nlohmann::json& j) {
    if (!j.contains("dims") || !j.contains("data") || j["dims"].size() != 3)
        throw std::runtime_error("tensor json: need \"dims\" of length 3 and \"data\"");
    const Index i = j["dims"][0].get<Index>(), jj = j["dims"][1].get<Index>(),
                k = j["dims"][2].get<Index>();
    const auto& data = j["data"];
    Vector v(Index(data.size()));
    for (size_t n = 0; n < data.size(); ++n)
        v[Index(n)] = data[n].get<double>();
    return Tensor3::from_data(i, jj, k, std::move(v));
}

Tensor3 load_tensor(const std::filesystem::path& path) {
    {
        std::ifstream is(path, std::ios::binary);
        if (!is)
            fail(path, "cannot open");
        char magic[4] = {};
        is.read(magic, 4);
        if (is && std::memcmp(magic, "TNS3", 4) == 0)
            return read_tns3(path);
    }
    std::ifstream is(path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        fail(path, std::string("neither TNS3 nor parsable JSON: ") + e.what());
    }
    try {
        return tensor_from_json(j);
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
}

nlohmann::json factors_to_json(const CpFactors& f) {
    f.require_consistent();
    json j;
    j["R"] = f.rank();
    j["alpha"] = std::vector<double>(f.alpha.data(), f.alpha.data() + f.alpha.size());
    j["X"] = matrix_rows(f.X);
    j["Y"] = matrix_rows(f.Y);
    j["Z"] = matrix_rows(f.Z);
    j["dims"] = {f.X.rows(), f.Y.rows(), f.Z.rows()};
    return j;
}

CpFactors factors_from_json(const nlohmann::json& j) {
    for (const char* key : {"R", "alpha", "X", "Y", "Z"})
        if (!j.contains(key))
            throw std::runtime_error(std::string("factors json: missing \"") + key + "\"");
    CpFactors f;
    const auto& alpha = j["alpha"];
    f.alpha.resize(Index(alpha.size()));
    for (size_t i = 0; i < alpha.size(); ++i)
        f.alpha[Index(i)] = alpha[i].get<double>();
    f.X = matrix_from_rows(j["X"], "X");
    f.Y = matrix_from_rows(j["Y"], "Y");
    f.Z = matrix_from_rows(j["Z"], "Z");
    if (j["R"].get<Index>() != f.rank())
        throw std::runtime_error("factors json: R does not match alpha length");
    f.require_consistent();
    return f;
}

nlohmann::json solve_result_to_json(const SolveResult& r, const LambdaEstimate* lambda_info) {
    json j = factors_to_json(r.factors);
    j["estimated_rank"] = r.estimated_rank;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["kkt_residual"] = r.kkt_residual;
    if (lambda_info) {
        j["sigma2_hat"] = lambda_info->sigma2_hat;
        j["gamma_hat"] = lambda_info->gamma_hat;
        j["lambda_hat"] = lambda_info->lambda_hat;
    }
    return j;
}

void write_trace_csv(std::ostream& os, const SolverTrace& trace) {
    os << "iter,objective,residual_half,step_gap,d_n,e_n,f_n,eta_n,nnz\n";
    for (const TraceRecord& r : trace)
        os << r.iter << ',' << format_double(r.objective) << ','
           << format_double(r.residual_half) << ',' << format_double(r.step_gap) << ','
           << format_double(r.d_n) << ',' << format_double(r.e_n) << ','
           << format_double(r.f_n) << ',' << format_double(r.eta_n) << ',' << r.nnz << '\n';
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& points) {
    os << "lambda,R_hat\n";
    for (const SweepPoint& p : points)
        os << format_double(p.lambda) << ',' << p.r_hat << '\n';
}

void write_rank_study_csv(std::ostream& os, const RankStudyReport& report) {
    os << "I,J,K,cn,trial,R_hat,residual,iters,ms\n";
    for (const TrialRow& r : report.rows)
        os << r.dims[0] << ',' << r.dims[1] << ',' << r.dims[2] << ',' << r.cn << ','
           << r.trial << ',' << r.r_hat << ',' << format_double(r.rel_residual) << ','
           << r.iterations << ',' << format_double(r.ms) << '\n';
}

void write_compare_csv(std::ostream& os, const ComparisonResult& cmp) {
    os << "iter,residual_lrat,residual_modals,objective_lrat\n";
    const size_t rows = std::max(cmp.penalized_trace.size(), cmp.unpenalized_trace.size());
    for (size_t i = 0; i < rows; ++i) {
        os << i << ',';
        if (i < cmp.penalized_trace.size())
            os << format_double(2.0 * cmp.penalized_trace[i].residual_half);
        os << ',';
        if (i < cmp.unpenalized_trace.size())
            os << format_double(2.0 * cmp.unpenalized_trace[i].residual_half);
        os << ',';
        if (i < cmp.penalized_trace.size())
            os << format_double(cmp.penalized_trace[i].objective);
        os << '\n';
    }
}

void write_consistency_csv(std::ostream& os, const ConsistencyResult& res) {
    os << "trial,recovered,bound\n";
    for (const ConsistencyTrialRow& r : res.rows)
        os << r.trial << ',' << (r.recovered ? 1 : 0) << ',' << format_double(res.bound)
           << '\n';
}

PgmImage read_pgm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        fail(path, "cannot open");

    // Header tokens may be separated by blanks, newlines and '#' comments.
    auto next_token = [&]() -> std::string {
        std::string tok;
        int c;
        while ((c = is.get()) != EOF) {
            if (c == '#') {
                while ((c = is.get()) != EOF && c != '\n')
                    ;
                continue;
            }
            if (std::isspace(c)) {
                if (!tok.empty())
                    return tok;
                continue;
            }
            tok.push_back(char(c));
        }
        return tok;
    };

    if (next_token() != "P5")
        fail(path, "not a binary PGM (expected magic P5)");
    auto parse_dim = [&](const char* what) {
        const std::string tok = next_token();
        long v = 0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || v < 1)
            fail(path, std::string("bad ") + what + " in header");
        return Index(v);
    };
    PgmImage img;
    img.width = parse_dim("width");
    img.height = parse_dim("height");
    const Index maxval = parse_dim("maxval");
    if (maxval > 255)
        fail(path, "only 8-bit PGM supported (maxval must be <= 255)");

    img.pixels.resize(size_t(img.width) * size_t(img.height));
    is.read(reinterpret_cast<char*>(img.pixels.data()), std::streamsize(img.pixels.size()));
    if (!is || is.gcount() != std::streamsize(img.pixels.size()))
        fail(path, "truncated pixel data");
    return img;
}

void write_pgm(const std::filesystem::path& path, const PgmImage& img) {
    if (img.pixels.size() != size_t(img.width) * size_t(img.height))
        fail(path, "pixel buffer does not match extents");
    std::ofstream os(path, std::ios::binary);
    if (!os)
        fail(path, "cannot open for writing");
    os << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.pixels.data()),
             std::streamsize(img.pixels.size()));
    if (!os)
        fail(path, "write failed");
}

Tensor3 ingest_frames(const std::filesystem::path& dir, const CropRegion& region,
                      const std::vector<std::string>& manifest) {
    std::vector<std::filesystem::path> files;
    if (!manifest.empty()) {
        for (const std::string& name : manifest) {
            std::filesystem::path p(name);
            files.push_back(p.is_absolute() ? p : dir / p);
        }
    } else {
        if (!std::filesystem::is_directory(dir))
            fail(dir, "not a directory");
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            if (!entry.is_regular_file())
                continue;
            std::string ext = entry.path().extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(),
                           [](unsigned char c) { return std::tolower(c); });
            if (ext == ".pgm")
                files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
            return a.filename().string() < b.filename().string();
        });
    }
    if (files.empty())
        fail(dir, "no PGM frames found");

    const PgmImage first = read_pgm(files[0]);
    CropRegion crop = region;
    if (crop.width == 0)
        crop.width = first.width - crop.x;
    if (crop.height == 0)
        crop.height = first.height - crop.y;
    if (crop.x < 0 || crop.y < 0 || crop.width < 1 || crop.height < 1 ||
        crop.x + crop.width > first.width || crop.y + crop.height > first.height)
        fail(files[0], "crop region does not fit inside the frame");

    Tensor3 stack(crop.width, crop.height, Index(files.size()));
    for (size_t f = 0; f < files.size(); ++f) {
        const PgmImage img = f == 0 ? first : read_pgm(files[f]);
        if (img.width != first.width || img.height != first.height)
            fail(files[f], "frame extents differ from the first frame");
        for (Index yy = 0; yy < crop.height; ++yy)
            for (Index xx = 0; xx < crop.width; ++xx)
                stack(xx, yy, Index(f)) =
                    double(img.pixels[size_t(crop.y + yy) * size_t(img.width) +
                                      size_t(crop.x + xx)]) /
                    255.0;
    }
    return stack;
}

} // namespace tensorank::io
