#include "json_util.hpp"

#include "../setgeom/detail.hpp"

#include <cmath>
#include <cstdio>

namespace setreach::jsonio
{

void fail(const std::string& path, const std::string& what) { throw ModelError(path.empty() ? "/" : path, what); }

json parse_text(const std::string& text)
{
    try
    {
        return json::parse(text);
    }
    catch (const json::parse_error& e)
    {
        std::size_t line = 1, col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < stop; ++i)
        {
            if (text[i] == '\n')
            {
                ++line;
                col = 1;
            }
            else
                ++col;
        }
        std::string what = e.what();
        // Drop nlohmann's "[json.exception.parse_error.101] parse error at line ..:" prefix.
        if (const auto p = what.find(": "); p != std::string::npos)
            what = what.substr(p + 2);
        throw ModelError("line " + std::to_string(line) + ", column " + std::to_string(col), what);
    }
}

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string child(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

void require_object(const json& j, const std::string& path)
{
    if (!j.is_object())
        fail(path, "expected an object");
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed)
{
    require_object(j, path);
    for (auto it = j.begin(); it != j.end(); ++it)
    {
        bool ok = false;
        for (const char* k : allowed)
            ok = ok || it.key() == k;
        if (!ok)
            fail(child(path, it.key()), "unknown field '" + it.key() + "'");
    }
}

bool has(const json& j, const char* key) { return j.is_object() && j.contains(key); }

const json& require(const json& j, const std::string& path, const char* key)
{
    require_object(j, path);
    if (!j.contains(key))
        fail(child(path, key), std::string("missing required field '") + key + "'");
    return j.at(key);
}

double get_number(const json& j, const std::string& path)
{
    if (!j.is_number())
        fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v))
        fail(path, "number is not finite");
    return v;
}

std::size_t get_count(const json& j, const std::string& path)
{
    if (!j.is_number_integer() || j.get<long long>() < 0)
        fail(path, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

bool get_bool(const json& j, const std::string& path)
{
    if (!j.is_boolean())
        fail(path, "expected true or false");
    return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path)
{
    if (!j.is_string())
        fail(path, "expected a string");
    return j.get<std::string>();
}

Vector get_vector(const json& j, const std::string& path)
{
    if (!j.is_array())
        fail(path, "expected an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = get_number(j[i], child(path, i));
    return v;
}

Matrix get_matrix(const json& j, const std::string& path)
{
    if (!j.is_array() || j.empty())
        fail(path, "expected a non-empty array of rows");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < j.size(); ++i)
    {
        const Vector row = get_vector(j[i], child(path, i));
        if (static_cast<std::size_t>(row.size()) != cols)
            fail(child(path, i), "row has " + std::to_string(row.size()) + " entries, expected " + std::to_string(cols));
        m.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return m;
}

SetRep get_set(const json& j, const std::string& path, bool unit_normals)
{
    const std::string type = get_string(require(j, path, "type"), child(path, "type"));
    try
    {
        if (type == "box")
        {
            check_keys(j, path, {"type", "lo", "hi"});
            const Vector lo = get_vector(require(j, path, "lo"), child(path, "lo"));
            const Vector hi = get_vector(require(j, path, "hi"), child(path, "hi"));
            if (lo.size() != hi.size())
                fail(path, "lo has " + std::to_string(lo.size()) + " entries but hi has " + std::to_string(hi.size()));
            return Box(lo, hi);
        }
        if (type == "point")
        {
            check_keys(j, path, {"type", "x"});
            return singleton(get_vector(require(j, path, "x"), child(path, "x")));
        }
        if (type == "hpolytope")
        {
            check_keys(j, path, {"type", "A", "b"});
            const Vector b = get_vector(require(j, path, "b"), child(path, "b"));
            const Matrix A = get_matrix(require(j, path, "A"), child(path, "A"));
            if (A.rows() != b.size())
                fail(path, "A has " + std::to_string(A.rows()) + " rows but b has " + std::to_string(b.size())
                               + " entries");
            if (unit_normals)
                return HPolytope::from_unit_normals(std::make_shared<const Matrix>(A), b);
            return HPolytope(A, b);
        }
        if (type == "vpolytope")
        {
            check_keys(j, path, {"type", "vertices"});
            return VPolytope(Matrix(get_matrix(require(j, path, "vertices"), child(path, "vertices")).transpose()));
        }
        if (type == "zonotope")
        {
            check_keys(j, path, {"type", "center", "generators"});
            const Vector c = get_vector(require(j, path, "center"), child(path, "center"));
            const json& g = require(j, path, "generators");
            Matrix G(c.size(), 0);
            if (!(g.is_array() && g.empty()))
            {
                G = get_matrix(g, child(path, "generators")).transpose();
                if (G.rows() != c.size())
                    fail(child(path, "generators"), "generators have dimension " + std::to_string(G.rows())
                                                        + " but center has " + std::to_string(c.size()));
            }
            return Zonotope(c, G);
        }
        if (type == "empty")
        {
            check_keys(j, path, {"type", "dim"});
            return EmptySet{static_cast<Eigen::Index>(get_count(require(j, path, "dim"), child(path, "dim")))};
        }
    }
    catch (const ModelError&)
    {
        throw;
    }
    catch (const std::exception& e)
    {
        fail(path, e.what());
    }
    fail(child(path, "type"), "unknown set type '" + type + "'");
}

HPolytope get_polyhedron(const json& j, const std::string& path)
{
    const SetRep s = get_set(j, path);
    if (const auto* p = std::get_if<HPolytope>(&s))
        return *p;
    if (const auto* b = std::get_if<Box>(&s))
        return to_hpolytope(*b);
    fail(path, "expected a set of type box or hpolytope");
}

json vector_json(const Vector& v)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        a.push_back(v(i));
    return a;
}

json matrix_json(const Matrix& m)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        a.push_back(vector_json(m.row(i).transpose()));
    return a;
}

json set_json(const SetRep& s)
{
    return std::visit(detail::overloaded{
                          [](const EmptySet& e) { return json{{"type", "empty"}, {"dim", e.dim}}; },
                          [](const Box& b) {
                              return json{{"type", "box"}, {"lo", vector_json(b.lo())}, {"hi", vector_json(b.hi())}};
                          },
                          [](const HPolytope& p) {
                              return json{{"type", "hpolytope"}, {"A", matrix_json(p.normals())},
                                  {"b", vector_json(p.offsets())}};
                          },
                          [](const VPolytope& p) {
                              return json{{"type", "vpolytope"}, {"vertices", matrix_json(p.vertices().transpose())}};
                          },
                          [](const Zonotope& z) {
                              return json{{"type", "zonotope"}, {"center", vector_json(z.center())},
                                  {"generators", matrix_json(z.generators().transpose())}};
                          }},
        s);
}

namespace
{

bool flat(const json& j)
{
    for (const auto& e : j)
        if (e.is_structured())
            return false;
    return true;
}

void write(std::string& out, const json& j, int indent)
{
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    switch (j.type())
    {
        case json::value_t::number_float:
        {
            const double v = j.get<double>();
            // "-0" would read back as the integer 0.
            if (v == 0.0 && std::signbit(v))
            {
                out += "-0.0";
                return;
            }
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out += buf;
            return;
        }
        case json::value_t::array:
        {
            if (j.empty())
            {
                out += "[]";
                return;
            }
            const bool inline_ = flat(j);
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i)
            {
                if (i > 0)
                    out += inline_ ? ", " : ",";
                if (!inline_)
                    out += "\n" + pad;
                write(out, j[i], indent + 2);
            }
            if (!inline_)
                out += "\n" + std::string(static_cast<std::size_t>(indent), ' ');
            out += ']';
            return;
        }
        case json::value_t::object:
        {
            if (j.empty())
            {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it)
            {
                out += first ? "\n" : ",\n";
                first = false;
                out += pad + json(it.key()).dump() + ": ";
                write(out, it.value(), indent + 2);
            }
            out += "\n" + std::string(static_cast<std::size_t>(indent), ' ') + '}';
            return;
        }
        default: out += j.dump(); return;
    }
}

} // namespace

std::string dump17(const json& j)
{
    std::string out;
    write(out, j, 0);
    out += '\n';
    return out;
}

} // namespace setreach::jsonio
