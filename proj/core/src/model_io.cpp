#include "glra/model_io.hpp"

#include "glra/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace glra::io {

namespace {

using nlohmann::json;

json matrix_json(const Matrix& a) {
  json data = json::array();
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) data.push_back(a(i, j));
  }
  return json{{"rows", a.rows()}, {"cols", a.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from(const json& j, const char* what) {
  try {
    const auto rows = j.at("rows").get<Index>();
    const auto cols = j.at("cols").get<Index>();
    const json& data = j.at("data");
    if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols)) {
      throw InputError(std::string(what) + ": data length does not match rows*cols");
    }
    Matrix out(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      for (Index k = 0; k < cols; ++k) {
        out(i, k) = data.at(static_cast<std::size_t>(i * cols + k)).get<double>();
      }
    }
    require_finite(out, what);
    return out;
  } catch (const json::exception& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

Uniqueness uniqueness_from_string(std::string_view s) {
  if (s == "UniqueByRank") return Uniqueness::UniqueByRank;
  if (s == "UniqueByGap") return Uniqueness::UniqueByGap;
  if (s == "NonUnique") return Uniqueness::NonUnique;
  throw InputError("unknown uniqueness classification '" + std::string(s) + "'");
}

std::string model_to_json(const rrr::RrrModel& m, int indent) {
  json doc;
  doc["schema"] = kSchema;
  doc["dims"] = {{"F", m.dim_f()}, {"G", m.dim_g()}};
  doc["r"] = m.rank;
  doc["A_hat"] = matrix_json(m.A_hat);
  if (m.weights) {
    doc["weights"] = {{"W_x", matrix_json(m.weights->W_x)},
                      {"W_A", matrix_json(m.weights->W_A)},
                      {"W_y", matrix_json(m.weights->W_y)}};
  } else {
    doc["weights"] = nullptr;
  }
  doc["fit_report"] = {{"objective_mse", m.report.objective_mse},
                       {"minimality_defect", m.report.minimality_defect},
                       {"uniqueness", std::string(to_string(m.report.uniqueness))},
                       {"containment_residual", m.report.containment_residual}};
  return doc.dump(indent);
}

rrr::RrrModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("model: invalid JSON: ") + e.what());
  }
  try {
    if (doc.at("schema").get<std::string>() != kSchema) {
      throw InputError("model: unsupported schema '" + doc.at("schema").get<std::string>() + "'");
    }
    rrr::RrrModel m;
    m.rank = doc.at("r").get<Index>();
    m.A_hat = matrix_from(doc.at("A_hat"), "A_hat");
    const json& w = doc.at("weights");
    if (!w.is_null()) {
      m.weights = rrr::Weights{matrix_from(w.at("W_x"), "W_x"), matrix_from(w.at("W_A"), "W_A"),
                               matrix_from(w.at("W_y"), "W_y")};
    }
    const json& rep = doc.at("fit_report");
    m.report.objective_mse = rep.at("objective_mse").get<double>();
    m.report.minimality_defect = rep.at("minimality_defect").get<double>();
    m.report.uniqueness = uniqueness_from_string(rep.at("uniqueness").get<std::string>());
    m.report.containment_residual = rep.value("containment_residual", 0.0);
    if (m.dim_f() != doc.at("dims").at("F").get<Index>() ||
        m.dim_g() != doc.at("dims").at("G").get<Index>()) {
      throw InputError("model: dims do not match the stored matrices");
    }
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("model: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const rrr::RrrModel& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(path.string() + ": cannot open file for writing");
  out << model_to_json(m) << '\n';
}

rrr::RrrModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace glra::io
