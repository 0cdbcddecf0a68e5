#include "ral/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ral {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

std::string array_to_json(const std::vector<double>& xs) {
    std::string out = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ",";
        out += format_double(xs[i]);
    }
    out += "]";
    return out;
}

nlohmann::json parse_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw parse_error("invalid JSON");
    return doc;
}

std::vector<double> json_number_array(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key)) throw parse_error(std::string("missing field: ") + key);
    const nlohmann::json& arr = doc.at(key);
    if (!arr.is_array()) throw parse_error(std::string("field is not an array: ") + key);
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& x : arr) {
        if (!x.is_number()) throw parse_error(std::string("non-numeric entry in ") + key);
        out.push_back(x.get<double>());
    }
    return out;
}

} // namespace

std::string distribution_to_json(const DiscreteDistribution& f) {
    return "{\"values\":" + array_to_json(f.values()) +
           ",\"masses\":" + array_to_json(f.masses()) + "}\n";
}

DiscreteDistribution distribution_from_json(const std::string& text) {
    nlohmann::json doc = parse_json(text);
    return {json_number_array(doc, "values"), json_number_array(doc, "masses")};
}

std::string distribution_to_csv(const DiscreteDistribution& f) {
    std::string out = "value,mass\n";
    for (std::size_t i = 0; i < f.size(); ++i)
        out += format_double(f.value(i)) + "," + format_double(f.mass(i)) + "\n";
    return out;
}

DiscreteDistribution distribution_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw parse_error("csv: empty file");
    auto strip = [](std::string s) {
        while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
        std::size_t b = s.find_first_not_of(' ');
        return b == std::string::npos ? std::string{} : s.substr(b);
    };
    if (strip(line) != "value,mass")
        throw parse_error("csv: expected header 'value,mass'");
    std::vector<double> values, masses;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip(line);
        if (line.empty()) continue;
        std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw parse_error("csv: missing comma on line " + std::to_string(lineno));
        try {
            std::size_t used = 0;
            values.push_back(std::stod(line.substr(0, comma), &used));
            masses.push_back(std::stod(line.substr(comma + 1), &used));
        } catch (const std::exception&) {
            throw parse_error("csv: bad number on line " + std::to_string(lineno));
        }
    }
    return {std::move(values), std::move(masses)};
}

std::string mechanism_to_json(const std::vector<double>& values, const Mechanism& m) {
    return "{\"values\":" + array_to_json(values) +
           ",\"allocation\":" + array_to_json(m.allocation) +
           ",\"payment\":" + array_to_json(m.payment) + "}\n";
}

std::pair<std::vector<double>, Mechanism> mechanism_from_json(const std::string& text) {
    nlohmann::json doc = parse_json(text);
    Mechanism m;
    std::vector<double> values = json_number_array(doc, "values");
    m.allocation = json_number_array(doc, "allocation");
    m.payment = json_number_array(doc, "payment");
    if (m.allocation.size() != values.size() || m.payment.size() != values.size())
        throw input_error("mechanism: array lengths differ from the support");
    return {std::move(values), std::move(m)};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write file: " + path);
    out << text;
}

DiscreteDistribution load_distribution(const std::string& path) {
    std::string text = read_file(path);
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
        return distribution_from_csv(text);
    return distribution_from_json(text);
}

void save_distribution(const std::string& path, const DiscreteDistribution& f) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
        write_file(path, distribution_to_csv(f));
    else
        write_file(path, distribution_to_json(f));
}

} // namespace ral
