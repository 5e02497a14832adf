#pragma once

#include "dskde/estimators.hpp"
#include "dskde/eval.hpp"
#include "dskde/lattice.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dskde {

//! Malformed or unreadable input file.
class format_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// ---- PGM (binary P5, 8-bit) -------------------------------------------------

Grid2<std::uint8_t> read_pgm_bytes(const std::filesystem::path& path);
//! Pixel byte v becomes v / maxval (v / 255 for ordinary 8-bit files).
Frame read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Grid2<std::uint8_t>& img);
//! Quantizes round(255 v), values clamped to [0, 1].
void write_pgm(const std::filesystem::path& path, const Frame& frame);
Grid2<std::uint8_t> quantize(const Frame& frame);

//! *.pgm files in a directory, sorted by file name.
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir);
//! Every stride-th file, in the given order.
FrameStack load_frames(std::span<const std::filesystem::path> paths, std::size_t stride = 1);
FrameStack load_frames(const std::filesystem::path& dir, std::size_t stride = 1);

// ---- model file ---------------------------------------------------------------
//
// Little-endian:
//   "DSKD" | u16 version | u16 variant (1 = GPA-DS, 2 = GPA-CD)
//   | u32 p | u32 q | u32 G* | f64 h | f64 h* | f64 sigma_hat | u64 seed
//   | G* x f64 grid (ascending) | G* p q x f32 table (slice-major, row-major)

inline constexpr std::uint16_t model_format_version = 1;

std::vector<std::uint8_t> encode_model(const GpaTable& table);
//! Throws format_error on a wrong magic or version, a payload whose length
//! disagrees with the declared sizes, or an invalid grid.
GpaTable decode_model(std::span<const std::uint8_t> bytes);
void save_model(const GpaTable& table, const std::filesystem::path& path);
GpaTable load_model(const std::filesystem::path& path);

// ---- config files -------------------------------------------------------------

//! `key = value` lines; '#' starts a comment. Keys are normalized to use '-'
//! instead of '_'.
using Config = std::map<std::string, std::string>;
Config parse_config(std::istream& is);
Config read_config(const std::filesystem::path& path);

// ---- detections / annotations CSV ---------------------------------------------

//! frame_id,r0,r1,c0,c1,seconds with empty box fields when nothing was found.
void write_detections(std::ostream& os, std::span<const Detection> detections);
std::vector<Detection> parse_detections(std::istream& is);
std::vector<Detection> read_detections(const std::filesystem::path& path);

//! frame_id,label,r0,r1,c0,c1 with empty box fields for vacant frames.
//! With `inclusive_bounds` the file's r1/c1 are inclusive and are converted
//! to half-open on load.
std::vector<Annotation> parse_annotations(std::istream& is, bool inclusive_bounds = false);
std::vector<Annotation> read_annotations(const std::filesystem::path& path, bool inclusive_bounds = false);
void write_annotations(std::ostream& os, std::span<const Annotation> annotations);

} // namespace dskde
