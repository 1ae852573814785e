#include <regpath/serialize.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include <regpath/error.hpp>

namespace regpath {
namespace {

using nlohmann::json;

std::string number(double v)
{
    if (!std::isfinite(v)) return "null";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string quoted(const std::string& s)
{
    std::string out = "\"";
    for (char ch : s) {
        switch (ch) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default:
            if (static_cast<unsigned char>(ch) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                out += buf;
            } else {
                out += ch;
            }
        }
    }
    return out + "\"";
}

template <typename Seq>
std::string number_array(const Seq& values)
{
    std::string out = "[";
    bool first = true;
    for (double v : values) {
        if (!first) out += ", ";
        out += number(v);
        first = false;
    }
    return out + "]";
}

std::string vector_array(const Eigen::VectorXd& v)
{
    return number_array(std::vector<double>(v.data(), v.data() + v.size()));
}

std::string string_array(const std::vector<std::string>& values)
{
    std::string out = "[";
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (j) out += ", ";
        out += quoted(values[j]);
    }
    return out + "]";
}

json parse_document(const std::string& text, const std::string& schema)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse_error, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("schema") || doc["schema"] != schema) {
        throw Error(ErrorKind::parse_error, "expected a \"" + schema + "\" document");
    }
    return doc;
}

double read_number(const json& v)
{
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!v.is_number()) throw Error(ErrorKind::parse_error, "expected a number");
    return v.get<double>();
}

Eigen::VectorXd read_vector(const json& v)
{
    if (!v.is_array()) throw Error(ErrorKind::parse_error, "expected an array of numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t j = 0; j < v.size(); ++j) out(static_cast<Eigen::Index>(j)) = read_number(v[j]);
    return out;
}

template <typename T>
T field(const json& obj, const char* key)
{
    if (!obj.contains(key)) throw Error(ErrorKind::parse_error, std::string("missing field \"") + key + "\"");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorKind::parse_error, std::string("field \"") + key + "\" has the wrong type");
    }
}

std::string loss_object(const LossModel& loss)
{
    std::ostringstream out;
    out << "{\"kind\": " << quoted(to_string(loss.kind())) << ", \"params\": {";
    if (loss.huber_t()) out << "\"t\": " << number(*loss.huber_t());
    out << "}";
    if (loss.kind() == LossKind::custom) {
        out << ", \"residual\": "
            << quoted(loss.residual_kind() == ResidualKind::regression ? "regression" : "classification")
            << ", \"knots\": " << number_array(loss.knots()) << ", \"pieces\": [";
        for (std::size_t j = 0; j < loss.num_pieces(); ++j) {
            const Piece& pc = loss.piece(j);
            if (j) out << ", ";
            out << "[" << number(pc.a) << ", " << number(pc.b) << ", " << number(pc.c) << "]";
        }
        out << "]";
    }
    out << "}";
    return out.str();
}

LossModel read_loss(const json& obj)
{
    const std::string kind = field<std::string>(obj, "kind");
    if (kind == "custom") {
        std::vector<double> knots;
        for (const json& v : obj.at("knots")) knots.push_back(read_number(v));
        std::vector<Piece> pieces;
        for (const json& v : obj.at("pieces")) {
            if (!v.is_array() || v.size() != 3) throw Error(ErrorKind::parse_error, "loss piece needs 3 numbers");
            pieces.push_back({read_number(v[0]), read_number(v[1]), read_number(v[2])});
        }
        const std::string residual = field<std::string>(obj, "residual");
        return LossModel::custom(std::move(knots), std::move(pieces),
                                 residual == "classification" ? ResidualKind::classification
                                                              : ResidualKind::regression);
    }
    std::optional<double> t;
    if (obj.contains("params") && obj["params"].contains("t")) t = read_number(obj["params"]["t"]);
    return make_loss(loss_kind_from_string(kind), t);
}

} // namespace

PathStatus path_status_from_string(const std::string& name)
{
    for (PathStatus s : {PathStatus::complete, PathStatus::optimum, PathStatus::max_active,
                         PathStatus::budget_exceeded, PathStatus::unbounded}) {
        if (name == to_string(s)) return s;
    }
    throw Error(ErrorKind::parse_error, "unknown path status \"" + name + "\"");
}

TvStatus tv_status_from_string(const std::string& name)
{
    for (TvStatus s : {TvStatus::running, TvStatus::interpolated, TvStatus::exhausted, TvStatus::max_steps,
                       TvStatus::ill_conditioned, TvStatus::knot_limit}) {
        if (name == to_string(s)) return s;
    }
    throw Error(ErrorKind::parse_error, "unknown spline path status \"" + name + "\"");
}

std::string export_path(const RegularizationPath& path)
{
    if (path.breakpoints.empty()) throw Error(ErrorKind::empty_path, "cannot export an empty path");
    const PathMeta& m = path.meta;
    std::ostringstream out;
    out << "{\n";
    out << "  \"schema\": \"regpath/1\",\n";
    out << "  \"task\": " << quoted(to_string(m.task)) << ",\n";
    out << "  \"loss\": " << loss_object(path.loss) << ",\n";
    out << "  \"lambda_max\": " << number(path.lambda_max()) << ",\n";
    out << "  \"breakpoints\": [";
    for (std::size_t j = 0; j < path.breakpoints.size(); ++j) {
        const Breakpoint& bp = path.breakpoints[j];
        out << (j ? ",\n" : "\n");
        out << "    {\"lambda\": " << number(bp.lambda) << ", \"coefficients\": " << vector_array(bp.beta)
            << ", \"intercept\": " << number(bp.intercept) << ", \"event\": " << quoted(format_events(bp.events))
            << "}";
    }
    out << "\n  ],\n";
    out << "  \"meta\": {\n";
    out << "    \"n\": " << m.n << ",\n";
    out << "    \"p\": " << m.p << ",\n";
    out << "    \"intercept\": " << (m.intercept ? "true" : "false") << ",\n";
    out << "    \"standardize\": " << (m.standardized ? "true" : "false") << ",\n";
    out << "    \"center\": " << vector_array(m.center) << ",\n";
    out << "    \"scale\": " << vector_array(m.scale) << ",\n";
    out << "    \"column_names\": " << string_array(m.column_names) << ",\n";
    out << "    \"response\": " << quoted(m.response) << ",\n";
    out << "    \"steps\": " << m.steps << ",\n";
    out << "    \"status\": " << quoted(to_string(m.status)) << ",\n";
    out << "    \"warnings\": " << string_array(m.warnings) << "\n";
    out << "  }\n";
    out << "}\n";
    return out.str();
}

RegularizationPath import_path(const std::string& text)
{
    const json doc = parse_document(text, "regpath/1");
    RegularizationPath path;
    try {
        path.loss = read_loss(doc.at("loss"));
        const json& meta = doc.at("meta");
        PathMeta& m = path.meta;
        const std::string task = field<std::string>(doc, "task");
        if (task == "regression") m.task = Task::regression;
        else if (task == "classification") m.task = Task::classification;
        else throw Error(ErrorKind::parse_error, "unknown task \"" + task + "\"");
        m.n = field<Eigen::Index>(meta, "n");
        m.p = field<Eigen::Index>(meta, "p");
        m.intercept = meta.value("intercept", true);
        m.standardized = field<bool>(meta, "standardize");
        if (meta.contains("center")) m.center = read_vector(meta["center"]);
        if (meta.contains("scale")) m.scale = read_vector(meta["scale"]);
        m.column_names = field<std::vector<std::string>>(meta, "column_names");
        m.response = meta.value("response", std::string());
        m.steps = field<std::size_t>(meta, "steps");
        m.status = path_status_from_string(meta.value("status", std::string("complete")));
        if (meta.contains("warnings")) m.warnings = field<std::vector<std::string>>(meta, "warnings");
        for (const json& bp : doc.at("breakpoints")) {
            Breakpoint b;
            b.lambda = read_number(bp.at("lambda"));
            b.beta = read_vector(bp.at("coefficients"));
            b.intercept = read_number(bp.at("intercept"));
            b.events = parse_events(field<std::string>(bp, "event"));
            if (b.beta.size() != m.p) throw Error(ErrorKind::parse_error, "breakpoint has the wrong coefficient count");
            path.breakpoints.push_back(std::move(b));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse_error, std::string("malformed path document: ") + e.what());
    }
    if (path.breakpoints.empty()) throw Error(ErrorKind::empty_path, "path document has no breakpoints");
    return path;
}

std::string export_tv_path(const SplinePath& path)
{
    if (path.breakpoints.empty()) throw Error(ErrorKind::empty_path, "cannot export an empty path");
    std::ostringstream out;
    out << "{\n";
    out << "  \"schema\": \"regpath-tv/1\",\n";
    out << "  \"order\": " << path.order << ",\n";
    out << "  \"domain\": {\"offset\": " << number(path.domain.offset) << ", \"scale\": " << number(path.domain.scale)
        << "},\n";
    out << "  \"lambda_max\": " << number(path.breakpoints.front().lambda) << ",\n";
    out << "  \"breakpoints\": [";
    for (std::size_t j = 0; j < path.breakpoints.size(); ++j) {
        const SplineBreakpoint& bp = path.breakpoints[j];
        out << (j ? ",\n" : "\n");
        out << "    {\"lambda\": " << number(bp.lambda) << ", \"knots\": " << number_array(bp.model.knots)
            << ", \"poly_coef\": " << vector_array(bp.model.poly_coef)
            << ", \"knot_coef\": " << vector_array(bp.model.knot_coef)
            << ", \"event\": " << quoted(format_tv_event(bp.event)) << "}";
    }
    out << "\n  ],\n";
    out << "  \"meta\": {\n";
    out << "    \"n\": " << path.n << ",\n";
    out << "    \"steps\": " << path.steps << ",\n";
    out << "    \"status\": " << quoted(to_string(path.status)) << ",\n";
    out << "    \"x_column\": " << quoted(path.x_column) << ",\n";
    out << "    \"y_column\": " << quoted(path.y_column) << "\n";
    out << "  }\n";
    out << "}\n";
    return out.str();
}

SplinePath import_tv_path(const std::string& text)
{
    const json doc = parse_document(text, "regpath-tv/1");
    SplinePath path;
    try {
        path.order = field<int>(doc, "order");
        if (path.order < 1) throw Error(ErrorKind::parse_error, "spline order must be at least 1");
        path.domain.offset = read_number(doc.at("domain").at("offset"));
        path.domain.scale = read_number(doc.at("domain").at("scale"));
        const json& meta = doc.at("meta");
        path.n = field<Eigen::Index>(meta, "n");
        path.steps = field<std::size_t>(meta, "steps");
        path.status = tv_status_from_string(field<std::string>(meta, "status"));
        path.x_column = meta.value("x_column", std::string("x"));
        path.y_column = meta.value("y_column", std::string("y"));
        for (const json& bp : doc.at("breakpoints")) {
            SplineBreakpoint b;
            b.lambda = read_number(bp.at("lambda"));
            b.model.order = path.order;
            const Eigen::VectorXd knots = read_vector(bp.at("knots"));
            b.model.knots.assign(knots.data(), knots.data() + knots.size());
            b.model.poly_coef = read_vector(bp.at("poly_coef"));
            b.model.knot_coef = read_vector(bp.at("knot_coef"));
            if (b.model.poly_coef.size() != path.order || b.model.knot_coef.size() != knots.size()) {
                throw Error(ErrorKind::parse_error, "spline breakpoint coefficients do not match its knots");
            }
            b.event = parse_tv_event(field<std::string>(bp, "event"));
            path.breakpoints.push_back(std::move(b));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse_error, std::string("malformed spline path document: ") + e.what());
    }
    if (path.breakpoints.empty()) throw Error(ErrorKind::empty_path, "path document has no breakpoints");
    return path;
}

std::string document_schema(const std::string& text)
{
    try {
        const json doc = json::parse(text);
        if (doc.is_object() && doc.contains("schema") && doc["schema"].is_string()) {
            return doc["schema"].get<std::string>();
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse_error, std::string("invalid JSON: ") + e.what());
    }
    throw Error(ErrorKind::parse_error, "document has no schema field");
}

std::string read_text_file(const std::string& filename)
{
    std::ifstream in(filename, std::ios::binary);
    if (!in) throw Error(ErrorKind::io_error, "cannot open " + filename);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& filename, const std::string& text)
{
    std::ofstream out(filename, std::ios::binary);
    if (!out) throw Error(ErrorKind::io_error, "cannot write " + filename);
    out << text;
    if (!out) throw Error(ErrorKind::io_error, "write to " + filename + " failed");
}

} // namespace regpath
