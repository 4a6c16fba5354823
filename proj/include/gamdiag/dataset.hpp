#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gamdiag {

enum class Role { Response, Covariate, Parameter };
enum class DType : std::uint8_t { Float64 = 0, Int64 = 1, Categorical = 2 };

std::string_view to_string(Role role);
std::string_view to_string(DType dtype);

struct ColumnSpec {
    std::string name;
    Role role = Role::Covariate;
    /// Unset means "infer": float64 when every cell parses, categorical otherwise
    /// (covariates only; response and parameter columns must be numeric).
    std::optional<DType> dtype;
};

/// Column-to-role map. Columns present in the file but absent from the schema
/// are skipped.
class Schema {
public:
    Schema() = default;
    Schema(std::initializer_list<ColumnSpec> specs) : specs_(specs) {}

    Schema& add(std::string name, Role role, std::optional<DType> dtype = std::nullopt);

    /// Parses "y:response,x1:covariate,g:covariate:categorical,mu:param".
    static Schema parse(std::string_view text);

    /// Schema covering every header column: `response` gets the response
    /// role, names in `params` the parameter role, the rest are covariates.
    static Schema infer(std::span<const std::string> header, std::string_view response,
                        std::span<const std::string> params);

    const std::vector<ColumnSpec>& specs() const noexcept { return specs_; }
    const ColumnSpec* find(std::string_view name) const;

private:
    std::vector<ColumnSpec> specs_;
};

struct Categorical {
    std::vector<std::int32_t> codes;
    std::vector<std::string> levels;
};

class Column {
public:
    using Storage = std::variant<std::vector<double>, std::vector<std::int64_t>, Categorical>;

    Column(std::string name, Role role, Storage storage);

    const std::string& name() const noexcept { return name_; }
    Role role() const noexcept { return role_; }
    DType dtype() const noexcept { return static_cast<DType>(storage_.index()); }
    std::size_t size() const noexcept;

    /// Read-only view; throws ConfigError unless the column is float64.
    std::span<const double> float64() const;
    std::span<const std::int64_t> int64() const;
    const Categorical& categorical() const;

    /// Numeric copy of any dtype (categorical columns yield their codes).
    std::vector<double> to_double() const;

    const Storage& storage() const noexcept { return storage_; }

private:
    std::string name_;
    Role role_;
    Storage storage_;
};

/// Immutable columnar store of responses, covariates and per-row model
/// parameters. Safe for concurrent reads.
class Dataset {
public:
    Dataset() = default;

    /// Throws SchemaError when `column.size()` differs from existing columns
    /// or the name is taken, DomainError on NaN in response/parameter columns.
    void add_column(Column column);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t num_columns() const noexcept { return columns_.size(); }
    const std::vector<Column>& columns() const noexcept { return columns_; }

    bool has(std::string_view name) const;
    /// Throws LookupError for unknown names.
    const Column& column(std::string_view name) const;
    /// Float64 view of a numeric column; LookupError / ConfigError otherwise.
    std::span<const double> numeric(std::string_view name) const;

    const Column& response() const;
    std::vector<std::string> names(Role role) const;

private:
    std::vector<Column> columns_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::size_t rows_ = 0;
};

Dataset load_csv(const std::filesystem::path& path, const Schema& schema);
Dataset parse_csv(std::string_view text, const Schema& schema);
/// Header names of a CSV file (used to infer a schema).
std::vector<std::string> read_csv_header(const std::filesystem::path& path);

/// Float64 values are written in shortest round-trip form, so reloading is
/// bit-exact.
void write_csv(const Dataset& ds, const std::filesystem::path& path);
std::string to_csv(const Dataset& ds);

/// Length-prefixed little-endian binary columns, magic "GDG1".
void write_binary(const Dataset& ds, const std::filesystem::path& path);
Dataset load_binary(const std::filesystem::path& path, const Schema& schema);

}  // namespace gamdiag
