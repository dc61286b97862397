#include "gradscan/radiometric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gradscan/error.hpp"
#include "gradscan/png_io.hpp"

namespace gradscan::radiometric {

using nlohmann::json;

double ResponseCurve::linearize(double normalized) const {
  const double v = std::clamp(normalized, 0.0, 1.0);
  return std::clamp(std::pow(v, gamma) / gain, 0.0, 1.0);
}

ResponseCurve fit_response(const ChartMeasurement& chart, const FitOptions& options) {
  for (std::size_t k = 0; k < chart.tiles.size(); ++k) {
    const ChartTile& t = chart.tiles[k];
    if (!(t.reflectance > 0.0 && t.reflectance <= 1.0))
      throw_invalid("chart reflectance must lie in (0,1]");
    if (!(t.measured >= 0.0 && t.measured <= 1.0)) throw_invalid("chart measurement must lie in [0,1]");
    if (k > 0 && !(t.reflectance > chart.tiles[k - 1].reflectance))
      throw_invalid("chart reflectances must be strictly increasing");
  }

  std::vector<ChartTile> usable;
  for (const ChartTile& t : chart.tiles) {
    if (t.measured > options.saturation_threshold || t.measured < options.black_threshold) continue;
    usable.push_back(t);
  }
  if (usable.size() < 3)
    throw_invalid("insufficient usable tiles (" + std::to_string(usable.size()) +
                  " after excluding saturated and near-black tiles, need 3)");
  for (std::size_t k = 1; k < usable.size(); ++k) {
    if (usable[k].measured < usable[k - 1].measured)
      throw_invalid("non-monotone chart measurements");
  }

  const double n = static_cast<double>(usable.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const ChartTile& t : usable) {
    mean_x += std::log(t.reflectance);
    mean_y += std::log(t.measured);
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const ChartTile& t : usable) {
    const double dx = std::log(t.reflectance) - mean_x;
    sxx += dx * dx;
    sxy += dx * (std::log(t.measured) - mean_y);
  }
  const double slope = sxy / sxx;
  if (!(slope > 0.0) || !std::isfinite(slope)) throw_invalid("non-monotone chart measurements");
  const double intercept = mean_y - slope * mean_x;

  ResponseCurve curve;
  curve.gamma = 1.0 / slope;
  curve.gain = std::exp(intercept * curve.gamma);

  double sum_sq = 0.0;
  for (const ChartTile& t : usable) {
    const double e = curve.gamma * std::log(t.measured) - std::log(curve.gain) - std::log(t.reflectance);
    sum_sq += e * e;
  }
  curve.residual = std::sqrt(sum_sq / n);
  return curve;
}

ImageBuffer linearize(const ImageBuffer& raw, const ResponseCurve& curve) {
  if (raw.colorspace() != ColorSpace::raw) throw_invalid("linearize expects a raw-tagged frame");
  ImageBuffer out = ImageBuffer::linear(raw.width(), raw.height(), raw.channels());
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = curve.linearize(raw.normalized(i));
  return out;
}

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& field, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw_invalid("chart CSV line " + std::to_string(line) + ": '" + field + "' is not a number");
  }
}

}  // namespace

ChartMeasurement parse_chart_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  ChartMeasurement chart;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      std::string compact;
      for (char c : line)
        if (c != ' ' && c != '\t') compact.push_back(c);
      if (compact != "reflectance,measured")
        throw_invalid("chart CSV header must be 'reflectance,measured'");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw_invalid("chart CSV line " + std::to_string(line_no) + " must hold two fields");
    chart.tiles.push_back({parse_number(trim(line.substr(0, comma)), line_no),
                           parse_number(trim(line.substr(comma + 1)), line_no)});
  }
  if (!header_seen) throw_invalid("chart CSV is empty");
  return chart;
}

ChartMeasurement read_chart_csv(const std::filesystem::path& path) {
  return parse_chart_csv(read_text_file(path));
}

std::string format_chart_csv(const ChartMeasurement& chart) {
  std::ostringstream out;
  out.precision(17);
  out << "reflectance,measured\n";
  for (const ChartTile& t : chart.tiles) out << t.reflectance << ',' << t.measured << '\n';
  return out.str();
}

json response_to_json(const ResponseCurve& curve) {
  return {{"gamma", curve.gamma}, {"gain", curve.gain}, {"residual", curve.residual}};
}

ResponseCurve response_from_json(const json& doc) {
  ResponseCurve curve;
  try {
    curve.gamma = doc.at("gamma").get<double>();
    curve.gain = doc.at("gain").get<double>();
    curve.residual = doc.at("residual").get<double>();
  } catch (const json::exception&) {
    throw_invalid("response JSON must hold numeric gamma, gain, residual");
  }
  if (!(curve.gamma > 0.0) || !(curve.gain > 0.0) || !(curve.residual >= 0.0))
    throw_invalid("response curve requires gamma > 0, gain > 0, residual >= 0");
  return curve;
}

void write_response(const std::filesystem::path& path, const ResponseCurve& curve) {
  write_text_file(path, response_to_json(curve).dump(2) + "\n");
}

ResponseCurve read_response(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw_invalid("response file '" + path.string() + "' is not valid JSON");
  }
  return response_from_json(doc);
}

}  // namespace gradscan::radiometric
