// Generated test driver. Runs the selected cases against candidate.cpp and
// prints one verdict line per case.
#include <bits/stdc++.h>
using namespace std;

#define main reasontrans_candidate_main
#include "candidate.cpp"
#undef main

namespace reasontrans {

struct Json {
    enum Kind { Null, Bool, Number, String, Array, Object } kind = Null;
    bool boolean = false;
    bool integral = false;
    long long ival = 0;
    double num = 0.0;
    std::string str;
    std::vector<Json> items;
    std::vector<std::pair<std::string, Json>> fields;
};

struct Parser {
    const std::string& text;
    size_t pos = 0;

    explicit Parser(const std::string& t) : text(t) {}

    void ws() {
        while (pos < text.size() && isspace(static_cast<unsigned char>(text[pos]))) pos++;
    }

    [[noreturn]] void fail(const char* what) {
        throw std::runtime_error(std::string("bad json: ") + what);
    }

    void expect(char c) {
        ws();
        if (pos >= text.size() || text[pos] != c) fail("unexpected character");
        pos++;
    }

    bool literal(const char* word) {
        size_t n = strlen(word);
        if (text.compare(pos, n, word) == 0) {
            pos += n;
            return true;
        }
        return false;
    }

    static void put_utf8(std::string& out, unsigned cp) {
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        }
    }

    std::string string_body() {
        expect('"');
        std::string out;
        while (pos < text.size() && text[pos] != '"') {
            char c = text[pos++];
            if (c != '\\') {
                out += c;
                continue;
            }
            if (pos >= text.size()) fail("truncated escape");
            char e = text[pos++];
            switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                case 'b': out += '\b'; break;
                case 'f': out += '\f'; break;
                case 'u': {
                    unsigned cp = std::stoul(text.substr(pos, 4), nullptr, 16);
                    pos += 4;
                    if (cp >= 0xD800 && cp < 0xDC00 && text.compare(pos, 2, "\\u") == 0) {
                        unsigned lo = std::stoul(text.substr(pos + 2, 4), nullptr, 16);
                        pos += 6;
                        cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00);
                    }
                    put_utf8(out, cp);
                    break;
                }
                default: out += e;
            }
        }
        expect('"');
        return out;
    }

    Json value() {
        ws();
        if (pos >= text.size()) fail("unexpected end");
        Json v;
        char c = text[pos];
        if (c == '{') {
            v.kind = Json::Object;
            pos++;
            ws();
            if (text[pos] == '}') { pos++; return v; }
            while (true) {
                ws();
                std::string key = string_body();
                expect(':');
                v.fields.emplace_back(key, value());
                ws();
                if (text[pos] == ',') { pos++; continue; }
                expect('}');
                return v;
            }
        }
        if (c == '[') {
            v.kind = Json::Array;
            pos++;
            ws();
            if (text[pos] == ']') { pos++; return v; }
            while (true) {
                v.items.push_back(value());
                ws();
                if (text[pos] == ',') { pos++; continue; }
                expect(']');
                return v;
            }
        }
        if (c == '"') {
            v.kind = Json::String;
            v.str = string_body();
            return v;
        }
        if (literal("true")) { v.kind = Json::Bool; v.boolean = true; return v; }
        if (literal("false")) { v.kind = Json::Bool; v.boolean = false; return v; }
        if (literal("null")) return v;
        size_t start = pos;
        while (pos < text.size() && strchr("+-0123456789.eE", text[pos])) pos++;
        std::string token = text.substr(start, pos - start);
        if (token.empty()) fail("unexpected token");
        v.kind = Json::Number;
        v.num = std::stod(token);
        v.integral = token.find_first_of(".eE") == std::string::npos;
        if (v.integral) {
            try { v.ival = std::stoll(token); } catch (...) { v.integral = false; }
        }
        return v;
    }
};

inline Json parse(const std::string& text) {
    Parser p(text);
    Json v = p.value();
    p.ws();
    if (p.pos != text.size()) p.fail("trailing characters");
    return v;
}

// Conversion from JSON to parameter types.
template <class T, class Enable = void>
struct From;

template <class T>
struct From<T, std::enable_if_t<std::is_integral_v<T> && !std::is_same_v<T, bool> && !std::is_same_v<T, char>>> {
    static T get(const Json& j) {
        if (j.kind == Json::Bool) return static_cast<T>(j.boolean);
        if (j.kind == Json::String && j.str.size() == 1) return static_cast<T>(j.str[0]);
        if (j.kind != Json::Number) throw std::runtime_error("expected integer argument");
        return j.integral ? static_cast<T>(j.ival) : static_cast<T>(j.num);
    }
};

template <class T>
struct From<T, std::enable_if_t<std::is_floating_point_v<T>>> {
    static T get(const Json& j) {
        if (j.kind != Json::Number) throw std::runtime_error("expected numeric argument");
        return static_cast<T>(j.num);
    }
};

template <>
struct From<bool> {
    static bool get(const Json& j) {
        if (j.kind == Json::Bool) return j.boolean;
        if (j.kind == Json::Number) return j.num != 0.0;
        throw std::runtime_error("expected boolean argument");
    }
};

template <>
struct From<char> {
    static char get(const Json& j) {
        if (j.kind == Json::String && !j.str.empty()) return j.str[0];
        if (j.kind == Json::Number) return static_cast<char>(j.ival);
        throw std::runtime_error("expected char argument");
    }
};

template <>
struct From<std::string> {
    static std::string get(const Json& j) {
        if (j.kind != Json::String) throw std::runtime_error("expected string argument");
        return j.str;
    }
};

template <class T>
struct From<std::vector<T>> {
    static std::vector<T> get(const Json& j) {
        std::vector<T> out;
        if (j.kind == Json::String) {
            for (char c : j.str) {
                Json ch;
                ch.kind = Json::String;
                ch.str = std::string(1, c);
                out.push_back(From<T>::get(ch));
            }
            return out;
        }
        if (j.kind != Json::Array) throw std::runtime_error("expected array argument");
        for (const Json& item : j.items) out.push_back(From<T>::get(item));
        return out;
    }
};

// Raw pointer parameters (`int arr[]`, `char *s`) point into storage that
// lives until the driver exits.
template <class T>
struct From<T*> {
    static T* get(const Json& j) {
        static std::deque<std::vector<std::remove_const_t<T>>> storage;
        storage.push_back(From<std::vector<std::remove_const_t<T>>>::get(j));
        auto& buf = storage.back();
        if constexpr (std::is_same_v<std::remove_const_t<T>, char>) buf.push_back('\0');
        buf.reserve(buf.size() + 1);
        return buf.data();
    }
};

// Conversion from return values to JSON.
template <class T>
Json to_json(const std::vector<T>& v);
template <class A, class B>
Json to_json(const std::pair<A, B>& p);

inline Json to_json(const std::string& s) {
    Json j;
    j.kind = Json::String;
    j.str = s;
    return j;
}
inline Json to_json(const char* s) { return to_json(std::string(s ? s : "")); }
inline Json to_json(char* s) { return to_json(std::string(s ? s : "")); }
inline Json to_json(char c) { return to_json(std::string(1, c)); }
inline Json to_json(bool b) {
    Json j;
    j.kind = Json::Bool;
    j.boolean = b;
    return j;
}
template <class T, std::enable_if_t<std::is_arithmetic_v<T>, int> = 0>
Json to_json(T v) {
    Json j;
    j.kind = Json::Number;
    j.num = static_cast<double>(v);
    j.integral = std::is_integral_v<T>;
    if (j.integral) j.ival = static_cast<long long>(v);
    return j;
}
template <class T>
Json to_json(const std::vector<T>& v) {
    Json j;
    j.kind = Json::Array;
    for (const auto& item : v) j.items.push_back(to_json(static_cast<T>(item)));
    return j;
}
template <class A, class B>
Json to_json(const std::pair<A, B>& p) {
    Json j;
    j.kind = Json::Array;
    j.items.push_back(to_json(p.first));
    j.items.push_back(to_json(p.second));
    return j;
}

inline std::string dump(const Json& j) {
    std::ostringstream out;
    switch (j.kind) {
        case Json::Null: out << "null"; break;
        case Json::Bool: out << (j.boolean ? "true" : "false"); break;
        case Json::Number:
            if (j.integral) out << j.ival;
            else out << std::setprecision(17) << j.num;
            break;
        case Json::String: {
            out << '"';
            for (char c : j.str) {
                if (c == '"' || c == '\\') out << '\\' << c;
                else if (c == '\n') out << "\\n";
                else if (static_cast<unsigned char>(c) < 0x20) out << ' ';
                else out << c;
            }
            out << '"';
            break;
        }
        case Json::Array: {
            out << '[';
            for (size_t i = 0; i < j.items.size(); i++) out << (i ? ", " : "") << dump(j.items[i]);
            out << ']';
            break;
        }
        case Json::Object: {
            out << '{';
            for (size_t i = 0; i < j.fields.size(); i++)
                out << (i ? ", " : "") << '"' << j.fields[i].first << "\": " << dump(j.fields[i].second);
            out << '}';
            break;
        }
    }
    return out.str();
}

inline bool equal(const Json& got, const Json& expected, double epsilon, bool tolerant) {
    auto numeric = [](const Json& j, double& out) {
        if (j.kind == Json::Number) { out = j.num; return true; }
        if (j.kind == Json::Bool) { out = j.boolean ? 1.0 : 0.0; return true; }
        return false;
    };
    double a, b;
    if ((got.kind == Json::Number || expected.kind == Json::Number) && numeric(got, a) && numeric(expected, b)) {
        if (!tolerant) {
            if (got.integral && expected.integral) return got.ival == expected.ival;
            return a == b;
        }
        if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
        double diff = std::fabs(a - b);
        return diff <= epsilon || diff <= epsilon * std::max(std::fabs(a), std::fabs(b));
    }
    if (got.kind != expected.kind) return false;
    switch (got.kind) {
        case Json::Null: return true;
        case Json::Bool: return got.boolean == expected.boolean;
        case Json::String: return got.str == expected.str;
        case Json::Array:
            if (got.items.size() != expected.items.size()) return false;
            for (size_t i = 0; i < got.items.size(); i++)
                if (!equal(got.items[i], expected.items[i], epsilon, tolerant)) return false;
            return true;
        case Json::Object:
            if (got.fields.size() != expected.fields.size()) return false;
            for (size_t i = 0; i < got.fields.size(); i++)
                if (got.fields[i].first != expected.fields[i].first ||
                    !equal(got.fields[i].second, expected.fields[i].second, epsilon, tolerant))
                    return false;
            return true;
        default: return false;
    }
}

template <class R, class... A, size_t... I>
Json invoke_impl(R (*fn)(A...), const std::vector<Json>& args, std::index_sequence<I...>) {
    std::tuple<std::decay_t<A>...> values{From<std::decay_t<A>>::get(args[I])...};
    if constexpr (std::is_void_v<R>) {
        fn(std::get<I>(values)...);
        return Json();
    } else {
        return to_json(fn(std::get<I>(values)...));
    }
}

template <class R, class... A>
Json invoke(R (*fn)(A...), const std::vector<Json>& args) {
    if (args.size() != sizeof...(A))
        throw std::runtime_error("expected " + std::to_string(sizeof...(A)) + " arguments, got " +
                                 std::to_string(args.size()));
    return invoke_impl(fn, args, std::index_sequence_for<A...>{});
}

inline std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

std::set<int> selected;
const bool tolerant = {{tolerant}};
const double epsilon = {{epsilon}};

template <class F>
void run_case(int index, const char* case_id, const std::string& args_json, const std::string& expected_json, F fn) {
    if (!selected.empty() && !selected.count(index)) return;
    std::cout << "\nREASONTRANS BEGIN " << case_id << std::endl;
    try {
        Json args = parse(args_json);
        Json expected = parse(expected_json);
        Json got = invoke(fn, args.items);
        if (equal(got, expected, epsilon, tolerant)) {
            std::cout << "\nREASONTRANS CASE " << case_id << " PASS" << std::endl;
        } else {
            std::cout << "\nREASONTRANS CASE " << case_id << " FAIL got=" << one_line(dump(got)) << std::endl;
        }
    } catch (const std::exception& e) {
        std::cout << "\nREASONTRANS CASE " << case_id << " ERROR " << one_line(e.what()) << std::endl;
    } catch (...) {
        std::cout << "\nREASONTRANS CASE " << case_id << " ERROR unknown exception" << std::endl;
    }
}

}  // namespace reasontrans

int main(int argc, char** argv) {
    for (int i = 1; i < argc; i++) reasontrans::selected.insert(atoi(argv[i]));
{{cases}}
    return 0;
}
