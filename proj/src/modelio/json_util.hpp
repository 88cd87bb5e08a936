// JSON helpers shared by the model and flowpipe readers/writers.
#ifndef SETREACH_MODELIO_JSON_UTIL_HPP_
#define SETREACH_MODELIO_JSON_UTIL_HPP_

#include "setreach/modelio.hpp"

#include <json.hpp>

#include <initializer_list>
#include <string>

namespace setreach::jsonio
{

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what);

/// Parses text, reporting syntax errors as "line L, column C".
json parse_text(const std::string& text);

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed);
void require_object(const json& j, const std::string& path);
const json& require(const json& j, const std::string& path, const char* key);
bool has(const json& j, const char* key);
std::string child(const std::string& path, const std::string& key);
std::string child(const std::string& path, std::size_t index);

double get_number(const json& j, const std::string& path);
std::size_t get_count(const json& j, const std::string& path);
bool get_bool(const json& j, const std::string& path);
std::string get_string(const json& j, const std::string& path);
Vector get_vector(const json& j, const std::string& path);
/// Array of equal-length rows.
Matrix get_matrix(const json& j, const std::string& path);
/// With unit_normals the hpolytope rows are taken as already normalized (exact reload).
SetRep get_set(const json& j, const std::string& path, bool unit_normals = false);
/// Box or hpolytope only.
HPolytope get_polyhedron(const json& j, const std::string& path);

json vector_json(const Vector& v);
json matrix_json(const Matrix& m);
json set_json(const SetRep& s);

/// Like json::dump but with every float printed as %.17g.
std::string dump17(const json& j);

} // namespace setreach::jsonio

#endif
