#include "spectv/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace spectv {

namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little, "decomposition spill assumes a little-endian host");

constexpr char kDecompMagic[] = "SPECTV-DECOMP 1";

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatError::Kind::NotFound, "cannot open '" + path.string() + "': file not found");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string format_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v))
    throw FormatError(FormatError::Kind::Malformed, "invalid number '" + s + "' for " + what);
  return v;
}

std::size_t parse_size(const std::string& s, const std::string& what) {
  const double v = parse_double(s, what);
  if (v < 0.0 || v != std::floor(v)) throw FormatError(FormatError::Kind::Malformed, "invalid integer '" + s + "' for " + what);
  return static_cast<std::size_t>(v);
}

// Netpbm header tokenizer: whitespace-separated tokens, '#' comments to EOL.
class PnmHeader {
public:
  explicit PnmHeader(const std::string& data) : data_(data) {}

  std::size_t next_number(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < data_.size() && std::isdigit(static_cast<unsigned char>(data_[pos_]))) ++pos_;
    if (start == pos_) {
      if (pos_ >= data_.size()) throw FormatError(FormatError::Kind::Truncated, std::string("PGM truncated before ") + what);
      throw FormatError(FormatError::Kind::Malformed, std::string("PGM: expected a number for ") + what);
    }
    return std::stoul(data_.substr(start, pos_ - start));
  }

  std::size_t position() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

private:
  void skip_space_and_comments() {
    while (pos_ < data_.size()) {
      const char c = data_[pos_];
      if (c == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& data_;
  std::size_t pos_ = 2;
};

ScalarField decode_pgm(const std::string& data, const fs::path& path) {
  const bool ascii = data[1] == '2';
  PnmHeader header(data);
  const std::size_t width = header.next_number("width");
  const std::size_t height = header.next_number("height");
  const std::size_t maxval = header.next_number("maxval");
  if (width == 0 || height == 0)
    throw FormatError(FormatError::Kind::ZeroDimensions, "'" + path.string() + "' has zero width or height");
  if (maxval == 0 || maxval > 65535) throw FormatError(FormatError::Kind::Malformed, "PGM maxval out of range");

  std::vector<double> values(width * height);
  const double scale = 1.0 / static_cast<double>(maxval);
  if (ascii) {
    for (double& v : values) {
      const std::size_t raw = header.next_number("pixel data");
      if (raw > maxval) throw FormatError(FormatError::Kind::Malformed, "PGM sample exceeds maxval");
      v = static_cast<double>(raw) * scale;
    }
  } else {
    header.advance(1);  // single whitespace byte after maxval
    const std::size_t bytes_per = maxval > 255 ? 2 : 1;
    const std::size_t begin = header.position();
    if (begin > data.size() || data.size() - begin < values.size() * bytes_per)
      throw FormatError(FormatError::Kind::Truncated, "'" + path.string() + "' pixel data is truncated");
    const auto* p = reinterpret_cast<const unsigned char*>(data.data() + begin);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const std::size_t raw = bytes_per == 2 ? (std::size_t{p[2 * i]} << 8) | p[2 * i + 1] : p[i];
      if (raw > maxval) throw FormatError(FormatError::Kind::Malformed, "PGM sample exceeds maxval");
      values[i] = static_cast<double>(raw) * scale;
    }
  }
  return ScalarField(width, height, std::move(values));
}

struct PngSource {
  const std::string* data;
  std::size_t offset;
};

void png_read_from_string(png_structp png, png_bytep out, png_size_t length) {
  auto* src = static_cast<PngSource*>(png_get_io_ptr(png));
  if (src->data->size() - src->offset < length) png_error(png, "truncated");
  std::memcpy(out, src->data->data() + src->offset, length);
  src->offset += length;
}

void png_error_handler(png_structp png, png_const_charp message) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  *text = message;
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

ScalarField decode_png(const std::string& data, const fs::path& path) {
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_error_handler, png_warning_handler);
  if (!png) throw std::runtime_error("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  PngSource src{&data, 0};
  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int depth = 0;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    const auto kind = error == "truncated" ? FormatError::Kind::Truncated : FormatError::Kind::Malformed;
    throw FormatError(kind, "'" + path.string() + "': PNG " + (error.empty() ? "decode error" : error));
  }
  png_set_read_fn(png, &src, png_read_from_string);
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color & PNG_COLOR_MASK_COLOR || color == PNG_COLOR_TYPE_PALETTE)
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  png_read_update_info(png, info);
  depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  pixels.resize(stride * height);
  rows.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = pixels.data() + r * stride;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  if (width == 0 || height == 0)
    throw FormatError(FormatError::Kind::ZeroDimensions, "'" + path.string() + "' has zero width or height");
  std::vector<double> values(std::size_t{width} * height);
  const double scale = depth == 16 ? 1.0 / 65535.0 : 1.0 / 255.0;
  for (png_uint_32 r = 0; r < height; ++r) {
    const unsigned char* row = rows[r];
    for (png_uint_32 c = 0; c < width; ++c) {
      const unsigned raw = depth == 16 ? (unsigned{row[2 * c]} << 8) | row[2 * c + 1] : row[c];
      values[std::size_t{r} * width + c] = raw * scale;
    }
  }
  return ScalarField(width, height, std::move(values));
}

void write_binary(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw WriteError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw WriteError("failed writing '" + path.string() + "'");
}

void append_doubles(std::string& out, std::span<const double> values) {
  const auto* p = reinterpret_cast<const char*>(values.data());
  out.append(p, values.size() * sizeof(double));
}

}  // namespace

void write_text_file(const fs::path& path, const std::string& text) { write_binary(path, text); }

ScalarField read_image(const fs::path& path) {
  if (!fs::exists(path)) throw FormatError(FormatError::Kind::NotFound, "'" + path.string() + "': file not found");
  const std::string data = read_all(path);
  if (data.size() >= 2 && data[0] == 'P' && (data[1] == '2' || data[1] == '5')) return decode_pgm(data, path);
  static const unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (data.size() >= 8 && std::memcmp(data.data(), kPngSig, 8) == 0) return decode_png(data, path);
  if (data.empty()) throw FormatError(FormatError::Kind::Truncated, "'" + path.string() + "' is empty");
  throw FormatError(FormatError::Kind::UnknownFormat, "'" + path.string() + "': unknown image format");
}

void write_pgm(const fs::path& path, const ScalarField& field, unsigned maxval) {
  if (maxval == 0 || maxval > 65535) throw std::invalid_argument("write_pgm: maxval out of range");
  std::string out = "P5\n" + std::to_string(field.width()) + " " + std::to_string(field.height()) + "\n" +
                    std::to_string(maxval) + "\n";
  const bool wide = maxval > 255;
  out.reserve(out.size() + field.size() * (wide ? 2 : 1));
  for (double v : field.values()) {
    const auto q = static_cast<unsigned>(std::lround(std::clamp(v, 0.0, 1.0) * maxval));
    if (wide) out.push_back(static_cast<char>(q >> 8));
    out.push_back(static_cast<char>(q & 0xff));
  }
  write_binary(path, out);
}

void write_ppm(const fs::path& path, const RgbImage& image) {
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  auto quantize = [](double v) { return static_cast<char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
  for (const Rgb& p : image.pixels) {
    out.push_back(quantize(p.r));
    out.push_back(quantize(p.g));
    out.push_back(quantize(p.b));
  }
  write_binary(path, out);
}

double default_t_max(std::size_t width, std::size_t height) {
  return 1.25 * static_cast<double>(std::max(width, height)) / 4.0;
}

std::string format_run_config(const RunConfig& c) {
  std::ostringstream out;
  out << "input = " << c.input << "\n"
      << "fidelity = " << to_string(c.fidelity) << "\n"
      << "n_scales = " << c.n_scales << "\n"
      << "t_min = " << format_number(c.t_min) << "\n"
      << "t_max = " << format_number(c.t_max) << "\n"
      << "spacing = " << to_string(c.spacing) << "\n"
      << "profile = " << c.profile << "\n"
      << "tau = " << format_number(c.solver.tau()) << "\n"
      << "sigma = " << format_number(c.solver.sigma()) << "\n"
      << "theta = " << format_number(c.solver.theta()) << "\n"
      << "max_its = " << c.solver.max_its() << "\n"
      << "rel_tol = " << format_number(c.solver.rel_tol()) << "\n"
      << "band_method = " << to_string(c.band_method) << "\n"
      << "min_prominence = " << format_number(c.band_params.min_prominence) << "\n";
  out << "manual_bands = ";
  for (std::size_t i = 0; i < c.band_params.manual.size(); ++i) {
    if (i) out << ",";
    out << c.band_params.manual[i].first << "-" << c.band_params.manual[i].second;
  }
  out << "\n"
      << "epsilon_seg = " << format_number(c.epsilon_seg) << "\n"
      << "seed = " << c.seed << "\n"
      << "output_dir = " << c.output_dir.string() << "\n";
  return out.str();
}

std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw FormatError(FormatError::Kind::Malformed, "line " + std::to_string(lineno) + ": expected 'key = value'");
    out.emplace_back(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> parse_intervals(const std::string& text) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      const std::size_t v = parse_size(item, "band interval");
      out.emplace_back(v, v);
    } else {
      out.emplace_back(parse_size(trim(item.substr(0, dash)), "band interval"),
                       parse_size(trim(item.substr(dash + 1)), "band interval"));
    }
  }
  return out;
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig c;
  double tau = c.solver.tau(), sigma = c.solver.sigma(), theta = c.solver.theta(), rel_tol = c.solver.rel_tol();
  std::size_t max_its = c.solver.max_its();
  try {
    for (const auto& [key, value] : parse_key_values(text)) {
      if (key == "input") c.input = value;
      else if (key == "fidelity") c.fidelity = parse_fidelity(value);
      else if (key == "n_scales") c.n_scales = parse_size(value, key);
      else if (key == "t_min") c.t_min = parse_double(value, key);
      else if (key == "t_max") c.t_max = parse_double(value, key);
      else if (key == "spacing") c.spacing = parse_spacing(value);
      else if (key == "profile") c.profile = value;
      else if (key == "tau") tau = parse_double(value, key);
      else if (key == "sigma") sigma = parse_double(value, key);
      else if (key == "theta") theta = parse_double(value, key);
      else if (key == "max_its") max_its = parse_size(value, key);
      else if (key == "rel_tol") rel_tol = parse_double(value, key);
      else if (key == "band_method") {
        if (value == "peaks") c.band_method = BandMethod::Peaks;
        else if (value == "otsu") c.band_method = BandMethod::Otsu;
        else if (value == "manual") c.band_method = BandMethod::Manual;
        else throw FormatError(FormatError::Kind::Malformed, "unknown band_method '" + value + "'");
      } else if (key == "min_prominence") c.band_params.min_prominence = parse_double(value, key);
      else if (key == "manual_bands") c.band_params.manual = parse_intervals(value);
      else if (key == "epsilon_seg") c.epsilon_seg = parse_double(value, key);
      else if (key == "seed") c.seed = parse_size(value, key);
      else if (key == "output_dir") c.output_dir = value;
      else throw FormatError(FormatError::Kind::Malformed, "unknown run_config key '" + key + "'");
    }
    c.solver = SolverConfig(tau, sigma, theta, max_its, rel_tol);
  } catch (const FormatError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw FormatError(FormatError::Kind::Malformed, std::string("run_config: ") + e.what());
  }
  return c;
}

PhantomSpec parse_phantom_spec(const std::string& text) {
  PhantomSpec spec;
  for (const auto& [key, value] : parse_key_values(text)) {
    if (key == "width") {
      spec.width = parse_size(value, key);
    } else if (key == "height") {
      spec.height = parse_size(value, key);
    } else if (key == "background") {
      spec.background = parse_double(value, key);
    } else if (key == "disc") {
      std::vector<double> parts;
      std::istringstream fields(value);
      std::string item;
      while (std::getline(fields, item, ',')) parts.push_back(parse_double(trim(item), "disc"));
      if (parts.size() != 4) throw FormatError(FormatError::Kind::Malformed, "disc needs cx,cy,r,c");
      spec.discs.push_back({parts[0], parts[1], parts[2], parts[3]});
    } else {
      throw FormatError(FormatError::Kind::Malformed, "unknown phantom key '" + key + "'");
    }
  }
  if (spec.width == 0 || spec.height == 0)
    throw FormatError(FormatError::Kind::ZeroDimensions, "phantom spec needs positive width and height");
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(FormatError::Kind::Malformed, e.what());
  }
  return spec;
}

PhantomSpec read_phantom_spec(const fs::path& path) { return parse_phantom_spec(read_all(path)); }

std::string format_response_csv(const SpectralDecomposition& dec) {
  std::string out = dec.mode == Fidelity::L1 ? "index,t_alpha,S_sq_raw,S_sq_clamped\n" : "index,t_alpha,S\n";
  for (std::size_t i = 0; i < dec.size(); ++i) {
    out += std::to_string(i) + "," + format_number(dec.grid[i]) + "," + format_number(dec.response[i]);
    if (dec.mode == Fidelity::L1) out += "," + format_number(std::max(0.0, dec.response[i]));
    out += "\n";
  }
  return out;
}

void save_decomposition(const fs::path& path, const SpectralDecomposition& dec, const ScalarField& f) {
  require_same_shape(dec.tail, f, "save_decomposition");
  std::ostringstream header;
  header << kDecompMagic << "\n"
         << "mode " << to_string(dec.mode) << "\n"
         << "width " << f.width() << "\n"
         << "height " << f.height() << "\n"
         << "scales " << dec.size() << "\n"
         << "spacing " << to_string(dec.grid.spacing()) << "\n"
         << "c_hat " << format_exact(dec.c_hat) << "\n"
         << "checksum " << dec.source_checksum << "\n"
         << "t";
  for (double t : dec.grid.values()) header << " " << format_exact(t);
  header << "\nend\n";
  std::string out = header.str();
  append_doubles(out, f.values());
  append_doubles(out, dec.tail.values());
  for (const ScalarField& slice : dec.phi) append_doubles(out, slice.values());
  append_doubles(out, dec.response);
  write_binary(path, out);
}

StoredDecomposition load_decomposition(const fs::path& path) {
  const std::string data = read_all(path);
  const std::string end_marker = "\nend\n";
  const auto end = data.find(end_marker);
  if (data.rfind(kDecompMagic, 0) != 0 || end == std::string::npos)
    throw FormatError(FormatError::Kind::UnknownFormat, "'" + path.string() + "' is not a decomposition file");

  std::istringstream header(data.substr(0, end));
  std::string line;
  std::getline(header, line);
  Fidelity mode = Fidelity::L1;
  std::size_t width = 0, height = 0, scales = 0;
  Spacing spacing = Spacing::Explicit;
  double c_hat = 0.0;
  std::uint64_t checksum = 0;
  std::vector<double> t;
  try {
    while (std::getline(header, line)) {
      std::istringstream fields(line);
      std::string key;
      fields >> key;
      if (key == "mode") {
        std::string v;
        fields >> v;
        mode = parse_fidelity(v);
      } else if (key == "width") {
        fields >> width;
      } else if (key == "height") {
        fields >> height;
      } else if (key == "scales") {
        fields >> scales;
      } else if (key == "spacing") {
        std::string v;
        fields >> v;
        spacing = parse_spacing(v);
      } else if (key == "c_hat") {
        std::string v;
        fields >> v;
        c_hat = parse_double(v, "c_hat");
      } else if (key == "checksum") {
        fields >> checksum;
      } else if (key == "t") {
        std::string v;
        while (fields >> v) t.push_back(parse_double(v, "t"));
      }
    }
  } catch (const std::invalid_argument& e) {
    throw FormatError(FormatError::Kind::Malformed, "'" + path.string() + "': " + e.what());
  }
  if (width == 0 || height == 0) throw FormatError(FormatError::Kind::ZeroDimensions, "decomposition has zero dimensions");
  if (t.size() != scales || scales < 2) throw FormatError(FormatError::Kind::Malformed, "decomposition scale list is inconsistent");

  const std::size_t pixels = width * height;
  const std::size_t expected = (pixels * (scales + 2) + scales) * sizeof(double);
  const std::size_t begin = end + end_marker.size();
  if (data.size() - begin < expected)
    throw FormatError(FormatError::Kind::Truncated, "'" + path.string() + "' payload is truncated");
  const char* cursor = data.data() + begin;
  auto take = [&cursor](std::size_t count) {
    std::vector<double> v(count);
    std::memcpy(v.data(), cursor, count * sizeof(double));
    cursor += count * sizeof(double);
    return v;
  };

  ScalarField f(width, height, take(pixels));
  ScalarField tail(width, height, take(pixels));
  std::vector<ScalarField> phi;
  phi.reserve(scales);
  for (std::size_t i = 0; i < scales; ++i) phi.emplace_back(width, height, take(pixels));
  std::vector<double> response = take(scales);
  SpectralDecomposition dec{ScaleGrid(std::move(t), spacing), std::move(phi), std::move(response), mode, c_hat,
                            std::move(tail), checksum};
  return {std::move(dec), std::move(f)};
}

void write_outputs(const fs::path& dir, const SpectralDecomposition& dec, const ScalarField& f,
                   std::span<const Band> bands, std::span<const ScalarField> masks, const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw WriteError("cannot create output directory '" + dir.string() + "'");

  write_binary(dir / "response.csv", format_response_csv(dec));
  write_binary(dir / "run_config.txt", format_run_config(config));
  for (const Band& b : bands) {
    write_pgm(dir / ("band_" + std::to_string(b.label) + ".pgm"),
              reconstruct(dec, FilterSpec::band(dec.size(), b.start, b.end)));
  }
  if (!bands.empty()) write_ppm(dir / "composite.ppm", colorize_bands(dec, bands, f, config.epsilon_seg));
  for (std::size_t i = 0; i < masks.size() && i < bands.size(); ++i) {
    write_pgm(dir / ("mask_" + std::to_string(bands[i].label) + ".pgm"), masks[i]);
  }
}

}  // namespace spectv
