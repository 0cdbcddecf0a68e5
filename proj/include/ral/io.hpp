#pragma once

#include <string>

#include "ral/distribution.hpp"
#include "ral/mechanism.hpp"

namespace ral {

// Serialization for the on-disk formats:
//   distribution JSON  {"values":[...],"masses":[...]}
//   distribution CSV   header "value,mass", one support point per row
//   mechanism JSON     {"values":[...],"allocation":[...],"payment":[...]}
// Writers emit numbers with 17 significant digits so that every double
// round-trips bit-exactly.

std::string format_double(double x);

std::string distribution_to_json(const DiscreteDistribution& f);
DiscreteDistribution distribution_from_json(const std::string& text);

std::string distribution_to_csv(const DiscreteDistribution& f);
DiscreteDistribution distribution_from_csv(const std::string& text);

std::string mechanism_to_json(const std::vector<double>& values, const Mechanism& m);
/// Returns the mechanism and its reference support.
std::pair<std::vector<double>, Mechanism> mechanism_from_json(const std::string& text);

/// Reads a distribution from a file, dispatching on the ".csv" extension
/// (anything else is treated as JSON).
DiscreteDistribution load_distribution(const std::string& path);
void save_distribution(const std::string& path, const DiscreteDistribution& f);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

} // namespace ral
