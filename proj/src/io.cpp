#include "dskde/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace dskde {

namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> read_file(const fs::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw format_error("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw format_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw format_error("write failed for " + path.string());
}

std::string trim(std::string_view s)
{
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line)
{
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ','))
    out.push_back(trim(field));
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  return out;
}

std::size_t parse_count(const std::string& s, const std::string& what)
{
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw format_error("bad " + what + " '" + s + "'");
  return v;
}

double parse_real(const std::string& s, const std::string& what)
{
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size())
      throw format_error("");
    return v;
  } catch (const std::exception&) {
    throw format_error("bad " + what + " '" + s + "'");
  }
}

// Box from four CSV fields; all empty means no box.
std::optional<BBox> parse_box(std::span<const std::string> f, bool inclusive, int line_no)
{
  const bool all_empty = std::all_of(f.begin(), f.end(), [](const auto& s) { return s.empty(); });
  if (all_empty)
    return std::nullopt;
  const std::string where = "line " + std::to_string(line_no);
  BBox b{ parse_count(f[0], "r0 on " + where), parse_count(f[1], "r1 on " + where),
          parse_count(f[2], "c0 on " + where), parse_count(f[3], "c1 on " + where) };
  if (inclusive) {
    ++b.r1;
    ++b.c1;
  }
  if (!b.valid())
    throw format_error("empty box on " + where);
  return b;
}

// ---- little-endian packing

class Writer
{
public:
  template<typename T>
  void put(T v)
  {
    static_assert(std::is_trivially_copyable_v<T>);
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
      std::reverse(raw, raw + sizeof(T));
    bytes.insert(bytes.end(), raw, raw + sizeof(T));
  }
  std::vector<std::uint8_t> bytes;
};

class Reader
{
public:
  explicit Reader(std::span<const std::uint8_t> b)
    : bytes_(b)
  {}
  template<typename T>
  T get()
  {
    if (pos_ + sizeof(T) > bytes_.size())
      throw format_error("model file truncated: payload length " + std::to_string(bytes_.size()) +
                         " bytes is shorter than its header declares");
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
      std::reverse(raw, raw + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, raw, sizeof(T));
    return v;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

constexpr std::size_t model_header_size = 4 + 2 + 2 + 3 * 4 + 3 * 8 + 8;

} // namespace

// ---- PGM ------------------------------------------------------------------------

namespace {

Grid2<std::uint8_t> read_pgm_raw(const fs::path& path, std::size_t& maxval_out)
{
  const auto bytes = read_file(path);
  std::size_t pos = 0;
  auto fail = [&](const std::string& why) -> format_error {
    return format_error("malformed PGM header in " + path.string() + ": " + why);
  };
  auto skip_space = [&] {
    for (;;) {
      while (pos < bytes.size() && std::isspace(bytes[pos]))
        ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n')
          ++pos;
        continue;
      }
      return;
    }
  };
  auto read_int = [&](const char* what) {
    skip_space();
    std::size_t v = 0;
    std::size_t digits = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      ++pos;
      if (++digits > 9)
        throw fail(std::string(what) + " too large");
    }
    if (digits == 0)
      throw fail(std::string("missing ") + what);
    return v;
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    throw fail("expected binary P5 magic");
  pos = 2;
  const std::size_t width = read_int("width");
  const std::size_t height = read_int("height");
  const std::size_t maxval = read_int("maxval");
  if (maxval == 0 || maxval > 255)
    throw format_error("unsupported PGM depth in " + path.string() + ": maxval " + std::to_string(maxval) +
                       " is not 8-bit");
  if (pos >= bytes.size() || !std::isspace(bytes[pos]))
    throw fail("missing whitespace after maxval");
  ++pos;
  if (width == 0 || height == 0)
    throw fail("zero dimension");
  if (bytes.size() - pos < width * height)
    throw format_error("PGM payload truncated in " + path.string());
  std::vector<std::uint8_t> px(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                               bytes.begin() + static_cast<std::ptrdiff_t>(pos + width * height));
  if (maxval < 255)
    for (auto v : px)
      if (v > maxval)
        throw format_error("PGM sample above maxval in " + path.string());
  maxval_out = maxval;
  return Grid2<std::uint8_t>(height, width, std::move(px));
}

} // namespace

Grid2<std::uint8_t> read_pgm_bytes(const fs::path& path)
{
  std::size_t maxval = 0;
  return read_pgm_raw(path, maxval);
}

Frame read_pgm(const fs::path& path)
{
  std::size_t maxval = 0;
  const auto img = read_pgm_raw(path, maxval);
  const double scale = static_cast<double>(maxval);
  Frame f(img.rows(), img.cols());
  for (std::size_t k = 0; k < img.size(); ++k)
    f[k] = img[k] / scale;
  return f;
}

void write_pgm(const fs::path& path, const Grid2<std::uint8_t>& img)
{
  std::string header = "P5\n" + std::to_string(img.cols()) + " " + std::to_string(img.rows()) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), img.values().begin(), img.values().end());
  write_file(path, bytes);
}

Grid2<std::uint8_t> quantize(const Frame& frame)
{
  Grid2<std::uint8_t> img(frame.rows(), frame.cols());
  for (std::size_t k = 0; k < frame.size(); ++k)
    img[k] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(frame[k], 0.0, 1.0)));
  return img;
}

void write_pgm(const fs::path& path, const Frame& frame)
{
  write_pgm(path, quantize(frame));
}

std::vector<fs::path> list_frames(const fs::path& dir)
{
  if (!fs::is_directory(dir))
    throw format_error("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file())
      continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm")
      out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  return out;
}

FrameStack load_frames(std::span<const fs::path> paths, std::size_t stride)
{
  if (stride < 1)
    throw std::invalid_argument("load_frames: stride must be at least 1");
  std::vector<Frame> frames;
  for (std::size_t k = 0; k < paths.size(); k += stride) {
    frames.push_back(read_pgm(paths[k]));
    if (!frames.back().same_shape(frames.front()))
      throw format_error("mixed dimensions: " + paths[k].string() + " is " +
                         std::to_string(frames.back().rows()) + "x" + std::to_string(frames.back().cols()) +
                         ", expected " + std::to_string(frames.front().rows()) + "x" +
                         std::to_string(frames.front().cols()));
  }
  return FrameStack::from_frames(frames);
}

FrameStack load_frames(const fs::path& dir, std::size_t stride)
{
  const auto paths = list_frames(dir);
  if (paths.empty())
    throw format_error("no .pgm frames in " + dir.string());
  return load_frames(paths, stride);
}

// ---- model ------------------------------------------------------------------------

std::vector<std::uint8_t> encode_model(const GpaTable& table)
{
  Writer w;
  w.bytes.reserve(model_header_size + table.g_star() * 8 + table.g_star() * table.rows() * table.cols() * 4);
  for (char ch : { 'D', 'S', 'K', 'D' })
    w.put(static_cast<std::uint8_t>(ch));
  w.put(model_format_version);
  w.put(static_cast<std::uint16_t>(table.variant()));
  w.put(static_cast<std::uint32_t>(table.rows()));
  w.put(static_cast<std::uint32_t>(table.cols()));
  w.put(static_cast<std::uint32_t>(table.g_star()));
  w.put(table.plan().h);
  w.put(table.plan().h_star);
  w.put(table.plan().sigma_hat);
  w.put(static_cast<std::uint64_t>(table.seed()));
  for (double x : table.grid())
    w.put(x);
  for (std::size_t g = 0; g < table.g_star(); ++g)
    for (std::size_t r = 0; r < table.rows(); ++r)
      for (std::size_t c = 0; c < table.cols(); ++c)
        w.put(static_cast<float>(table.value(g, r, c)));
  return std::move(w.bytes);
}

GpaTable decode_model(std::span<const std::uint8_t> bytes)
{
  Reader rd(bytes);
  char magic[4];
  for (auto& ch : magic)
    ch = static_cast<char>(rd.get<std::uint8_t>());
  if (std::string_view(magic, 4) != "DSKD")
    throw format_error("not a model file (bad magic)");
  const auto version = rd.get<std::uint16_t>();
  if (version != model_format_version)
    throw format_error("unsupported model format version " + std::to_string(version));
  const auto variant = rd.get<std::uint16_t>();
  if (variant != 1 && variant != 2)
    throw format_error("bad variant flag " + std::to_string(variant));
  const std::size_t p = rd.get<std::uint32_t>();
  const std::size_t q = rd.get<std::uint32_t>();
  const std::size_t gs = rd.get<std::uint32_t>();
  BandwidthPlan plan;
  plan.h = rd.get<double>();
  plan.h_star = rd.get<double>();
  plan.sigma_hat = rd.get<double>();
  plan.m = p * q;
  const auto seed = rd.get<std::uint64_t>();

  const std::uint64_t expected = static_cast<std::uint64_t>(gs) * 8 + static_cast<std::uint64_t>(gs) * p * q * 4;
  if (rd.remaining() != expected)
    throw format_error("model payload length mismatch: header declares " + std::to_string(expected) +
                       " bytes, file has " + std::to_string(rd.remaining()));

  std::vector<double> grid(gs);
  for (auto& x : grid)
    x = rd.get<double>();
  for (std::size_t g = 1; g < gs; ++g)
    if (!(grid[g] > grid[g - 1]))
      throw format_error("model grid is not strictly ascending");
  Volume table(gs, p, q);
  for (std::size_t g = 0; g < gs; ++g)
    for (std::size_t r = 0; r < p; ++r)
      for (std::size_t c = 0; c < q; ++c)
        table(g, r, c) = rd.get<float>();
  try {
    return GpaTable(std::move(grid), table, plan, static_cast<Variant>(variant), seed);
  } catch (const std::invalid_argument& e) {
    throw format_error(std::string("invalid model: ") + e.what());
  }
}

void save_model(const GpaTable& table, const fs::path& path)
{
  write_file(path, encode_model(table));
}

GpaTable load_model(const fs::path& path)
{
  const auto bytes = read_file(path);
  return decode_model(bytes);
}

// ---- config -----------------------------------------------------------------------

Config parse_config(std::istream& is)
{
  Config cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const auto t = trim(line);
    if (t.empty())
      continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw format_error("config line " + std::to_string(line_no) + ": expected 'key = value'");
    auto key = trim(std::string_view(t).substr(0, eq));
    auto value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty())
      throw format_error("config line " + std::to_string(line_no) + ": empty key");
    std::replace(key.begin(), key.end(), '_', '-');
    cfg[key] = value;
  }
  return cfg;
}

Config read_config(const fs::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw format_error("cannot open config " + path.string());
  return parse_config(in);
}

// ---- CSV --------------------------------------------------------------------------

void write_detections(std::ostream& os, std::span<const Detection> detections)
{
  os << "frame_id,r0,r1,c0,c1,seconds\n";
  for (const auto& d : detections) {
    os << d.frame_id << ',';
    if (d.box)
      os << d.box->r0 << ',' << d.box->r1 << ',' << d.box->c0 << ',' << d.box->c1 << ',';
    else
      os << ",,,,";
    os << std::setprecision(9) << d.seconds << '\n';
  }
}

std::vector<Detection> parse_detections(std::istream& is)
{
  std::vector<Detection> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty())
      continue;
    auto f = split_csv(line);
    if (line_no == 1 && !f.empty() && f[0] == "frame_id")
      continue;
    if (f.size() != 6)
      throw format_error("detections line " + std::to_string(line_no) + ": expected 6 fields");
    Detection d;
    d.frame_id = f[0];
    d.box = parse_box(std::span(f).subspan(1, 4), false, line_no);
    d.seconds = f[5].empty() ? 0.0 : parse_real(f[5], "seconds");
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Detection> read_detections(const fs::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw format_error("cannot open " + path.string());
  return parse_detections(in);
}

std::vector<Annotation> parse_annotations(std::istream& is, bool inclusive_bounds)
{
  std::vector<Annotation> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty())
      continue;
    auto f = split_csv(line);
    if (line_no == 1 && !f.empty() && f[0] == "frame_id")
      continue;
    if (f.size() != 6)
      throw format_error("annotations line " + std::to_string(line_no) + ": expected 6 fields");
    Annotation a;
    a.frame_id = f[0];
    try {
      a.label = parse_label(f[1]);
      a.box = parse_box(std::span(f).subspan(2, 4), inclusive_bounds, line_no);
      a.validate();
    } catch (const std::invalid_argument& e) {
      throw format_error("annotations line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<Annotation> read_annotations(const fs::path& path, bool inclusive_bounds)
{
  std::ifstream in(path);
  if (!in)
    throw format_error("cannot open " + path.string());
  return parse_annotations(in, inclusive_bounds);
}

void write_annotations(std::ostream& os, std::span<const Annotation> annotations)
{
  os << "frame_id,label,r0,r1,c0,c1\n";
  for (const auto& a : annotations) {
    os << a.frame_id << ',' << to_string(a.label) << ',';
    if (a.box)
      os << a.box->r0 << ',' << a.box->r1 << ',' << a.box->c0 << ',' << a.box->c1 << '\n';
    else
      os << ",,,\n";
  }
}

} // namespace dskde
