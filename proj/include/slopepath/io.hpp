#pragma once

#include <slopepath/types.hpp>

#include <iosfwd>
#include <string>

// Flat-file formats. Every real is written in shortest round-trip form, so
// write → read reproduces values bit for bit.
namespace slopepath::io {

/// Shortest decimal string that parses back to exactly `value`.
std::string format_real(double value);
double parse_real(const std::string& token);

/// Instance CSV: first column y, remaining p columns X, optional header row.
/// The ridge weight lives in a JSON sidecar `<stem>.json` ({"ridge": r}); a
/// missing sidecar means ridge = 0.
ProblemInstance read_instance(const std::string& csvPath);
void write_instance(const std::string& csvPath, const ProblemInstance& instance);
ProblemInstance parse_instance_csv(std::istream& in);
void write_instance_csv(std::ostream& out, const ProblemInstance& instance);
std::string sidecar_path(const std::string& csvPath);

/// Vector files: one value per line or comma-separated; a non-numeric first
/// line is taken as a header.
Vector read_vector(const std::string& path);
void write_vector(const std::string& path, const Vector& v);
Vector parse_vector(std::istream& in);
void write_vector_csv(std::ostream& out, const Vector& v, const std::string& header = "");

/// Weight ray as JSON: {"lambda0": [...], "lambda_bar": [...], "eta_max": x|null}.
std::string ray_to_json(const WeightRay& ray);
WeightRay ray_from_json(const std::string& text);

/// JSON lines: a header record, then one record per event and per segment in
/// path order. Infinite reals are written as null.
void write_path_jsonl(std::ostream& out, const SolutionPath& path);
SolutionPath read_path_jsonl(std::istream& in);

/// Event table with columns index, eta, kind, g, k.
void write_events_csv(std::ostream& out, const SolutionPath& path);

} // namespace slopepath::io
