#include "gamdiag/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "gamdiag/error.hpp"

namespace gamdiag {

std::string_view to_string(Role role) {
    switch (role) {
        case Role::Response: return "response";
        case Role::Covariate: return "covariate";
        case Role::Parameter: return "param";
    }
    return "?";
}

std::string_view to_string(DType dtype) {
    switch (dtype) {
        case DType::Float64: return "float64";
        case DType::Int64: return "int64";
        case DType::Categorical: return "categorical";
    }
    return "?";
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

Role parse_role(std::string_view s) {
    if (s == "response" || s == "y") return Role::Response;
    if (s == "covariate" || s == "x") return Role::Covariate;
    if (s == "param" || s == "parameter" || s == "theta") return Role::Parameter;
    throw SchemaError("unknown role '" + std::string(s) + "'");
}

DType parse_dtype(std::string_view s) {
    if (s == "float64" || s == "double" || s == "f64") return DType::Float64;
    if (s == "int64" || s == "int" || s == "i64") return DType::Int64;
    if (s == "categorical" || s == "cat" || s == "factor") return DType::Categorical;
    throw SchemaError("unknown dtype '" + std::string(s) + "'");
}

bool is_missing(std::string_view cell) {
    return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "null";
}

std::optional<double> parse_double(std::string_view cell) {
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
    return value;
}

std::optional<std::int64_t> parse_int(std::string_view cell) {
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
    return value;
}

// RFC-4180 record reader over an in-memory buffer. Fields are returned as
// owned strings only when quoted; unquoted fields are views into the buffer.
class CsvReader {
public:
    explicit CsvReader(std::string_view text) : text_(text) {
        if (text_.size() >= 3 && std::memcmp(text_.data(), "\xEF\xBB\xBF", 3) == 0)
            pos_ = 3;
    }

    bool next(std::vector<std::string>& fields) {
        fields.clear();
        if (pos_ >= text_.size()) return false;
        std::string field;
        bool in_quotes = false;
        bool was_quoted = false;
        while (pos_ < text_.size()) {
            char c = text_[pos_++];
            if (in_quotes) {
                if (c == '"') {
                    if (pos_ < text_.size() && text_[pos_] == '"') {
                        field.push_back('"');
                        ++pos_;
                    } else {
                        in_quotes = false;
                    }
                } else {
                    field.push_back(c);
                }
                continue;
            }
            if (c == '"' && field.empty() && !was_quoted) {
                in_quotes = true;
                was_quoted = true;
            } else if (c == ',') {
                fields.push_back(finish(field, was_quoted));
                field.clear();
                was_quoted = false;
            } else if (c == '\r' || c == '\n') {
                if (c == '\r' && pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
                fields.push_back(finish(field, was_quoted));
                return true;
            } else {
                field.push_back(c);
            }
        }
        if (in_quotes) throw ParseError("unterminated quoted field", line_);
        fields.push_back(finish(field, was_quoted));
        return true;
    }

    void set_line(std::size_t line) { line_ = line; }

private:
    static std::string finish(std::string& field, bool quoted) {
        if (quoted) return field;
        return std::string(trim(field));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
};

bool blank_record(const std::vector<std::string>& fields) {
    return fields.size() == 1 && fields[0].empty();
}

Column build_column(const ColumnSpec& spec, std::vector<std::string>& cells) {
    auto numeric_role = spec.role != Role::Covariate;
    DType dtype;
    if (spec.dtype) {
        dtype = *spec.dtype;
    } else if (numeric_role) {
        dtype = DType::Float64;
    } else {
        dtype = DType::Float64;
        for (const auto& cell : cells) {
            if (!is_missing(cell) && !parse_double(cell)) {
                dtype = DType::Categorical;
                break;
            }
        }
    }
    if (numeric_role && dtype == DType::Categorical)
        throw SchemaError("column '" + spec.name + "' has role " + std::string(to_string(spec.role)) +
                              " and cannot be categorical",
                          spec.name);

    switch (dtype) {
        case DType::Float64: {
            std::vector<double> values(cells.size());
            for (std::size_t i = 0; i < cells.size(); ++i) {
                const auto& cell = cells[i];
                if (is_missing(cell)) {
                    if (numeric_role)
                        throw ParseError("missing value in " + std::string(to_string(spec.role)) +
                                             " column '" + spec.name + "' at row " +
                                             std::to_string(i + 1),
                                         i + 1);
                    values[i] = std::numeric_limits<double>::quiet_NaN();
                    continue;
                }
                auto v = parse_double(cell);
                if (!v || (numeric_role && !std::isfinite(*v)))
                    throw ParseError("non-numeric value '" + cell + "' in column '" + spec.name +
                                         "' at row " + std::to_string(i + 1),
                                     i + 1);
                values[i] = *v;
            }
            return Column(spec.name, spec.role, std::move(values));
        }
        case DType::Int64: {
            std::vector<std::int64_t> values(cells.size());
            for (std::size_t i = 0; i < cells.size(); ++i) {
                auto v = parse_int(cells[i]);
                if (!v)
                    throw ParseError("non-integer value '" + cells[i] + "' in column '" + spec.name +
                                         "' at row " + std::to_string(i + 1),
                                     i + 1);
                values[i] = *v;
            }
            return Column(spec.name, spec.role, std::move(values));
        }
        case DType::Categorical: {
            Categorical cat;
            cat.codes.resize(cells.size());
            std::unordered_map<std::string, std::int32_t> lookup;
            for (std::size_t i = 0; i < cells.size(); ++i) {
                auto [it, inserted] =
                    lookup.try_emplace(cells[i], static_cast<std::int32_t>(cat.levels.size()));
                if (inserted) cat.levels.push_back(cells[i]);
                cat.codes[i] = it->second;
            }
            return Column(spec.name, spec.role, std::move(cat));
        }
    }
    throw SchemaError("unreachable dtype");
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'", "path");
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void append_double(std::string& out, double v) {
    if (std::isnan(v)) {
        out += "NA";
        return;
    }
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
}

void append_field(std::string& out, std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
        out += s;
        return;
    }
    out.push_back('"');
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

}  // namespace

Schema& Schema::add(std::string name, Role role, std::optional<DType> dtype) {
    specs_.push_back({std::move(name), role, dtype});
    return *this;
}

Schema Schema::parse(std::string_view text) {
    Schema schema;
    for (auto item : split(text, ',')) {
        if (item.empty()) continue;
        auto parts = split(item, ':');
        if (parts.size() < 2 || parts.size() > 3 || parts[0].empty())
            throw SchemaError("bad schema entry '" + std::string(item) + "'");
        std::optional<DType> dtype;
        if (parts.size() == 3) dtype = parse_dtype(parts[2]);
        schema.add(std::string(parts[0]), parse_role(parts[1]), dtype);
    }
    return schema;
}

Schema Schema::infer(std::span<const std::string> header, std::string_view response,
                     std::span<const std::string> params) {
    Schema schema;
    for (const auto& name : header) {
        if (name == response) {
            schema.add(name, Role::Response);
        } else if (std::find(params.begin(), params.end(), name) != params.end()) {
            schema.add(name, Role::Parameter);
        } else {
            schema.add(name, Role::Covariate);
        }
    }
    return schema;
}

const ColumnSpec* Schema::find(std::string_view name) const {
    for (const auto& s : specs_)
        if (s.name == name) return &s;
    return nullptr;
}

Column::Column(std::string name, Role role, Storage storage)
    : name_(std::move(name)), role_(role), storage_(std::move(storage)) {}

std::size_t Column::size() const noexcept {
    return std::visit(
        [](const auto& s) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Categorical>)
                return s.codes.size();
            else
                return s.size();
        },
        storage_);
}

std::span<const double> Column::float64() const {
    if (auto* v = std::get_if<std::vector<double>>(&storage_)) return *v;
    throw ConfigError("column '" + name_ + "' is " + std::string(to_string(dtype())) +
                          ", not float64",
                      name_);
}

std::span<const std::int64_t> Column::int64() const {
    if (auto* v = std::get_if<std::vector<std::int64_t>>(&storage_)) return *v;
    throw ConfigError("column '" + name_ + "' is not int64", name_);
}

const Categorical& Column::categorical() const {
    if (auto* v = std::get_if<Categorical>(&storage_)) return *v;
    throw ConfigError("column '" + name_ + "' is not categorical", name_);
}

std::vector<double> Column::to_double() const {
    return std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, std::vector<double>>) {
                return s;
            } else if constexpr (std::is_same_v<T, Categorical>) {
                return std::vector<double>(s.codes.begin(), s.codes.end());
            } else {
                return std::vector<double>(s.begin(), s.end());
            }
        },
        storage_);
}

void Dataset::add_column(Column column) {
    if (index_.count(column.name()))
        throw SchemaError("duplicate column '" + column.name() + "'", column.name());
    if (!columns_.empty() && column.size() != rows_)
        throw SchemaError("column '" + column.name() + "' has " + std::to_string(column.size()) +
                              " rows, expected " + std::to_string(rows_),
                          column.name());
    if (column.role() != Role::Covariate) {
        if (column.dtype() == DType::Categorical)
            throw SchemaError("column '" + column.name() + "' must be numeric", column.name());
        if (column.dtype() == DType::Float64) {
            auto values = column.float64();
            auto bad = std::find_if(values.begin(), values.end(),
                                    [](double v) { return !std::isfinite(v); });
            if (bad != values.end())
                throw DomainError("non-finite value in " + std::string(to_string(column.role())) +
                                      " column '" + column.name() + "' at row " +
                                      std::to_string(bad - values.begin() + 1),
                                  column.name());
        }
    }
    if (columns_.empty()) rows_ = column.size();
    index_.emplace(column.name(), columns_.size());
    columns_.push_back(std::move(column));
}

bool Dataset::has(std::string_view name) const { return index_.find(name) != index_.end(); }

const Column& Dataset::column(std::string_view name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw LookupError(std::string(name));
    return columns_[it->second];
}

std::span<const double> Dataset::numeric(std::string_view name) const {
    return column(name).float64();
}

const Column& Dataset::response() const {
    for (const auto& c : columns_)
        if (c.role() == Role::Response) return c;
    throw SchemaError("dataset has no response column");
}

std::vector<std::string> Dataset::names(Role role) const {
    std::vector<std::string> out;
    for (const auto& c : columns_)
        if (c.role() == role) out.push_back(c.name());
    return out;
}

Dataset parse_csv(std::string_view text, const Schema& schema) {
    CsvReader reader(text);
    std::vector<std::string> header;
    if (!reader.next(header)) throw SchemaError("CSV has no header row");

    std::vector<std::ptrdiff_t> slot(header.size(), -1);
    std::vector<std::vector<std::string>> cells(schema.specs().size());
    for (std::size_t s = 0; s < schema.specs().size(); ++s) {
        const auto& name = schema.specs()[s].name;
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw SchemaError("missing column '" + name + "'", name);
        slot[it - header.begin()] = static_cast<std::ptrdiff_t>(s);
    }

    std::vector<std::string> fields;
    std::size_t row = 0;
    while (true) {
        reader.set_line(row + 1);
        if (!reader.next(fields)) break;
        if (blank_record(fields)) continue;
        ++row;
        if (fields.size() != header.size())
            throw ParseError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                                 " fields, header has " + std::to_string(header.size()),
                             row);
        for (std::size_t f = 0; f < fields.size(); ++f)
            if (slot[f] >= 0) cells[slot[f]].push_back(std::move(fields[f]));
    }
    if (row == 0) throw EmptyDatasetError();

    Dataset ds;
    for (std::size_t s = 0; s < schema.specs().size(); ++s)
        ds.add_column(build_column(schema.specs()[s], cells[s]));
    return ds;
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema) {
    return parse_csv(read_file(path), schema);
}

std::vector<std::string> read_csv_header(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'", "path");
    std::string line;
    std::getline(in, line);
    CsvReader reader(line);
    std::vector<std::string> header;
    reader.next(header);
    return header;
}

std::string to_csv(const Dataset& ds) {
    std::string out;
    const auto& cols = ds.columns();
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c) out.push_back(',');
        append_field(out, cols[c].name());
    }
    out.push_back('\n');
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) out.push_back(',');
            std::visit(
                [&](const auto& s) {
                    using T = std::decay_t<decltype(s)>;
                    if constexpr (std::is_same_v<T, std::vector<double>>) {
                        append_double(out, s[i]);
                    } else if constexpr (std::is_same_v<T, std::vector<std::int64_t>>) {
                        out += std::to_string(s[i]);
                    } else {
                        append_field(out, s.levels[s.codes[i]]);
                    }
                },
                cols[c].storage());
        }
        out.push_back('\n');
    }
    return out;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'", "out");
    auto text = to_csv(ds);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

// Binary layout: "GDG1", then per column: u32 name length, name bytes,
// u8 dtype, u64 n, payload. Float64/int64 payloads are n raw little-endian
// 8-byte values; categorical payloads are n i32 codes followed by a u32
// level count and length-prefixed (u32) level strings.
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary column format assumes a little-endian host");

template <typename T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw ParseError("truncated binary dataset", 0);
    return v;
}

std::string get_string(std::ifstream& in) {
    auto len = get<std::uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw ParseError("truncated binary dataset", 0);
    return s;
}

}  // namespace

void write_binary(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'", "out");
    out.write("GDG1", 4);
    for (const auto& col : ds.columns()) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(col.name().size()));
        out.write(col.name().data(), static_cast<std::streamsize>(col.name().size()));
        put<std::uint8_t>(out, static_cast<std::uint8_t>(col.dtype()));
        put<std::uint64_t>(out, col.size());
        std::visit(
            [&](const auto& s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Categorical>) {
                    out.write(reinterpret_cast<const char*>(s.codes.data()),
                              static_cast<std::streamsize>(s.codes.size() * sizeof(std::int32_t)));
                    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.levels.size()));
                    for (const auto& level : s.levels) {
                        put<std::uint32_t>(out, static_cast<std::uint32_t>(level.size()));
                        out.write(level.data(), static_cast<std::streamsize>(level.size()));
                    }
                } else {
                    out.write(reinterpret_cast<const char*>(s.data()),
                              static_cast<std::streamsize>(s.size() * sizeof(s[0])));
                }
            },
            col.storage());
    }
}

Dataset load_binary(const std::filesystem::path& path, const Schema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'", "path");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "GDG1", 4) != 0) throw ParseError("bad magic, expected GDG1", 0);

    std::map<std::string, Column::Storage> found;
    while (in.peek() != std::char_traits<char>::eof()) {
        auto name = get_string(in);
        auto dtype = get<std::uint8_t>(in);
        auto n = get<std::uint64_t>(in);
        Column::Storage storage;
        switch (static_cast<DType>(dtype)) {
            case DType::Float64: {
                std::vector<double> v(n);
                in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * 8));
                storage = std::move(v);
                break;
            }
            case DType::Int64: {
                std::vector<std::int64_t> v(n);
                in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * 8));
                storage = std::move(v);
                break;
            }
            case DType::Categorical: {
                Categorical cat;
                cat.codes.resize(n);
                in.read(reinterpret_cast<char*>(cat.codes.data()),
                        static_cast<std::streamsize>(n * 4));
                auto levels = get<std::uint32_t>(in);
                for (std::uint32_t l = 0; l < levels; ++l) cat.levels.push_back(get_string(in));
                storage = std::move(cat);
                break;
            }
            default:
                throw ParseError("unknown dtype byte " + std::to_string(dtype), 0);
        }
        if (!in) throw ParseError("truncated binary dataset", 0);
        found.emplace(std::move(name), std::move(storage));
    }

    Dataset ds;
    for (const auto& spec : schema.specs()) {
        auto it = found.find(spec.name);
        if (it == found.end()) throw SchemaError("missing column '" + spec.name + "'", spec.name);
        ds.add_column(Column(spec.name, spec.role, it->second));
    }
    if (ds.num_columns() > 0 && ds.rows() == 0) throw EmptyDatasetError();
    return ds;
}

}  // namespace gamdiag
