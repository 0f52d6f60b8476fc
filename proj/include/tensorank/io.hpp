#pragma once

#include "tensorank/experiments.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace tensorank::io {

/// Binary tensor container: ASCII magic "TNS3", three little-endian uint32
/// extents I, J, K, then I*J*K little-endian float64 values in the tensor's
/// flat order. Readers validate the magic, the payload length and entry
/// finiteness and throw std::runtime_error with the offending path on any
/// mismatch.
void write_tns3(const std::filesystem::path& path, const Tensor3& t);
Tensor3 read_tns3(const std::filesystem::path& path);

/// JSON tensor form {"dims": [I, J, K], "data": [...]} with data in the
/// same flat order.
nlohmann::json tensor_to_json(const Tensor3& t);
Tensor3 tensor_from_json(const nlohmann::json& j);

/// Loads either container, sniffing the TNS3 magic first and falling back
/// to JSON.
Tensor3 load_tensor(const std::filesystem::path& path);

/// Factor serialization: {"R", "alpha", "X", "Y", "Z", "dims"} with each
/// factor matrix as an array of rows.
nlohmann::json factors_to_json(const CpFactors& f);
CpFactors factors_from_json(const nlohmann::json& j);

/// Solve summary: the factor fields plus estimated_rank, iterations,
/// converged and kkt_residual. When a data-driven penalty was used, pass the
/// estimate to also record sigma2_hat, gamma_hat and lambda_hat.
nlohmann::json solve_result_to_json(const SolveResult& r,
                                    const LambdaEstimate* lambda_info = nullptr);

/// CSV emitters. All numbers are written with enough digits to round-trip
/// exactly, and no line depends on anything but the inputs, so the bytes are
/// reproducible run to run.
void write_trace_csv(std::ostream& os, const SolverTrace& trace);
void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& points);
void write_rank_study_csv(std::ostream& os, const RankStudyReport& report);
void write_compare_csv(std::ostream& os, const ComparisonResult& cmp);
void write_consistency_csv(std::ostream& os, const ConsistencyResult& res);

/// 8-bit binary PGM (magic P5, maxval <= 255). Frames are cropped to
/// `region` and stacked as a width x height x frames tensor with intensities
/// mapped to [0, 1] by value / 255, so brighter pixels become larger entries.
struct CropRegion {
    Index x = 0, y = 0;   ///< top-left corner, pixel coordinates
    Index width = 0, height = 0; ///< 0 means full frame
};

struct PgmImage {
    Index width = 0, height = 0;
    std::vector<unsigned char> pixels; ///< row-major, pixels[y * width + x]
};

PgmImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const PgmImage& img);

/// Stacks every *.pgm file under `dir` (lexicographic filename order), or
/// exactly the files named in `manifest` when it is nonempty (order kept,
/// paths relative to `dir` or absolute). All frames must share extents and
/// contain the crop region; violations raise std::runtime_error naming the
/// offending file.
Tensor3 ingest_frames(const std::filesystem::path& dir, const CropRegion& region,
                      const std::vector<std::string>& manifest = {});

/// Shared formatting helper: shortest decimal text that parses back to the
/// same double.
std::string format_double(double v);

} // namespace tensorank::io
