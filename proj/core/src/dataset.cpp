#include "autolabel/dataset.hpp"

#include "autolabel/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace autolabel {

namespace {

bool is_nan_token(std::string_view token) {
    if (token.size() != 3) {
        return false;
    }
    auto lower = [](char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); };
    return lower(token[0]) == 'n' && lower(token[1]) == 'a' && lower(token[2]) == 'n';
}

bool parse_double(std::string_view token, double& out) {
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find('\t', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

struct RawRow {
    double label = 0.0;
    std::vector<double> values;
};

std::vector<RawRow> read_rows(const std::string& path, bool has_header) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open dataset file: " + path);
    }
    std::vector<RawRow> rows;
    std::string line;
    std::size_t line_number = 0;
    bool skipped_header = !has_header;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (!skipped_header) {
            skipped_header = true;
            continue;
        }
        const auto fields = split_tabs(line);
        if (fields.size() < 2) {
            throw FormatError(path + ": row " + std::to_string(line_number) + " has fewer than 2 columns");
        }
        RawRow row;
        if (!parse_double(fields[0], row.label) || !std::isfinite(row.label)) {
            throw ParseError(path + ": row " + std::to_string(line_number) + ": non-numeric label '" +
                             std::string(fields[0]) + "'");
        }
        // Trailing empty cells or NaN tokens mark absent timesteps; a gap
        // before the last present value is malformed.
        std::vector<bool> present(fields.size() - 1, false);
        std::vector<double> parsed(fields.size() - 1, 0.0);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            const auto token = fields[i];
            if (token.empty() || is_nan_token(token)) {
                continue;
            }
            double value = 0.0;
            if (!parse_double(token, value)) {
                throw ParseError(path + ": row " + std::to_string(line_number) + ", column " +
                                 std::to_string(i + 1) + ": non-numeric token '" + std::string(token) + "'");
            }
            if (!std::isfinite(value)) {
                throw FormatError(path + ": row " + std::to_string(line_number) + ", column " +
                                  std::to_string(i + 1) + ": non-finite value");
            }
            present[i - 1] = true;
            parsed[i - 1] = value;
        }
        std::size_t valid = present.size();
        while (valid > 0 && !present[valid - 1]) {
            --valid;
        }
        for (std::size_t i = 0; i < valid; ++i) {
            if (!present[i]) {
                throw ParseError(path + ": row " + std::to_string(line_number) +
                                 ": absent timestep before the last present value");
            }
        }
        if (valid < 2) {
            throw FormatError(path + ": row " + std::to_string(line_number) + ": instance length " +
                              std::to_string(valid) + " violates minimum length 2");
        }
        row.values.assign(parsed.begin(), parsed.begin() + static_cast<std::ptrdiff_t>(valid));
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) {
        throw FormatError(path + ": dataset needs at least 2 instances");
    }
    return rows;
}

std::string stem_of(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

void renumber_labels(const std::vector<double>& raw, TimeSeriesDataset& dataset) {
    std::map<double, int> mapping;
    for (const double value : raw) {
        mapping.emplace(value, 0);
    }
    int next = 0;
    dataset.label_names.clear();
    for (auto& [value, id] : mapping) {
        id = next++;
        dataset.label_names.push_back(value);
    }
    std::vector<int> labels;
    labels.reserve(raw.size());
    for (const double value : raw) {
        labels.push_back(mapping.at(value));
    }
    dataset.labels = std::move(labels);
    dataset.class_count = next;
}

}  // namespace

int TimeSeriesDataset::min_length() const {
    int result = std::numeric_limits<int>::max();
    for (const auto& instance : instances) {
        result = std::min(result, instance.length());
    }
    return instances.empty() ? 0 : result;
}

int TimeSeriesDataset::max_length() const {
    int result = 0;
    for (const auto& instance : instances) {
        result = std::max(result, instance.length());
    }
    return result;
}

int RepresentativeSet::class_count() const {
    std::set<int> distinct(labels.begin(), labels.end());
    return static_cast<int>(distinct.size());
}

int RepresentativeSet::expert_count() const {
    return static_cast<int>(std::count(origins.begin(), origins.end(), Origin::Expert));
}

TimeSeriesDataset load_ucr_tsv(const std::string& path, bool has_header) {
    const auto rows = read_rows(path, has_header);
    TimeSeriesDataset dataset;
    dataset.name = stem_of(path);
    std::vector<double> raw_labels;
    raw_labels.reserve(rows.size());
    for (const auto& row : rows) {
        TimeSeries instance;
        instance.values = Eigen::Map<const Vector>(row.values.data(),
                                                   static_cast<Eigen::Index>(row.values.size()));
        dataset.instances.push_back(std::move(instance));
        raw_labels.push_back(row.label);
    }
    renumber_labels(raw_labels, dataset);
    return dataset;
}

TimeSeriesDataset load_ucr_channels(const std::vector<std::string>& channel_paths, bool has_header) {
    if (channel_paths.empty()) {
        throw InputError("no channel files given");
    }
    std::vector<std::vector<RawRow>> channels;
    channels.reserve(channel_paths.size());
    for (const auto& path : channel_paths) {
        channels.push_back(read_rows(path, has_header));
    }
    const std::size_t n = channels.front().size();
    for (std::size_t c = 1; c < channels.size(); ++c) {
        if (channels[c].size() != n) {
            throw FormatError("channel files disagree on instance count: " + channel_paths[c]);
        }
    }
    TimeSeriesDataset dataset;
    dataset.name = stem_of(channel_paths.front());
    std::vector<double> raw_labels;
    raw_labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& first = channels.front()[i];
        for (std::size_t c = 1; c < channels.size(); ++c) {
            const auto& row = channels[c][i];
            if (row.label != first.label) {
                throw FormatError("channel files disagree on the label of instance " + std::to_string(i));
            }
            if (row.values.size() != first.values.size()) {
                throw FormatError("channel files disagree on the length of instance " + std::to_string(i));
            }
        }
        TimeSeries instance;
        instance.values.resize(static_cast<Eigen::Index>(first.values.size()),
                               static_cast<Eigen::Index>(channels.size()));
        for (std::size_t c = 0; c < channels.size(); ++c) {
            const auto& row = channels[c][i];
            for (std::size_t t = 0; t < row.values.size(); ++t) {
                instance.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = row.values[t];
            }
        }
        dataset.instances.push_back(std::move(instance));
        raw_labels.push_back(first.label);
    }
    renumber_labels(raw_labels, dataset);
    return dataset;
}

TimeSeriesDataset load_ucr_directory(const std::string& directory, bool has_header) {
    const std::regex pattern(R"(^(.*)_dim(\d+)\.tsv$)");
    std::map<long, std::string> by_index;
    for (const auto& entry : std::filesystem::directory_iterator(directory)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        const std::string filename = entry.path().filename().string();
        std::smatch match;
        if (std::regex_match(filename, match, pattern)) {
            by_index[std::stol(match[2].str())] = entry.path().string();
        }
    }
    if (by_index.empty()) {
        throw InputError("no <name>_dim<i>.tsv channel files found in " + directory);
    }
    std::vector<std::string> paths;
    paths.reserve(by_index.size());
    for (const auto& [index, path] : by_index) {
        paths.push_back(path);
    }
    auto dataset = load_ucr_channels(paths, has_header);
    dataset.name = std::filesystem::path(directory).filename().string();
    return dataset;
}

TimeSeriesDataset load_dataset(const std::string& path, bool has_header) {
    if (std::filesystem::is_directory(path)) {
        return load_ucr_directory(path, has_header);
    }
    return load_ucr_tsv(path, has_header);
}

void write_ucr_tsv(const TimeSeriesDataset& dataset, const std::string& path) {
    if (dataset.channels() != 1) {
        throw ContractError("write_ucr_tsv supports univariate datasets only");
    }
    if (!dataset.labels) {
        throw ContractError("write_ucr_tsv needs a labeled dataset");
    }
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write dataset file: " + path);
    }
    char buffer[64];
    for (int i = 0; i < dataset.size(); ++i) {
        const double original = dataset.label_names.empty()
                                    ? static_cast<double>((*dataset.labels)[static_cast<std::size_t>(i)])
                                    : dataset.label_names[static_cast<std::size_t>(
                                          (*dataset.labels)[static_cast<std::size_t>(i)])];
        std::snprintf(buffer, sizeof(buffer), "%.17g", original);
        out << buffer;
        const auto& values = dataset.instances[static_cast<std::size_t>(i)].values;
        for (Eigen::Index t = 0; t < values.rows(); ++t) {
            std::snprintf(buffer, sizeof(buffer), "%.17g", values(t, 0));
            out << '\t' << buffer;
        }
        out << '\n';
    }
}

TimeSeriesDataset znormalize(const TimeSeriesDataset& dataset) {
    TimeSeriesDataset result = dataset;
    for (auto& instance : result.instances) {
        for (Eigen::Index c = 0; c < instance.values.cols(); ++c) {
            auto column = instance.values.col(c);
            const double lo = column.minCoeff();
            const double hi = column.maxCoeff();
            if (lo == hi) {
                column.setZero();
                continue;
            }
            const double mean = column.mean();
            const double sigma = std::sqrt((column.array() - mean).square().mean());
            column = (column.array() - mean) / sigma;
        }
    }
    return result;
}

RepresentativeSelection select_representatives(const TimeSeriesDataset& dataset, double fraction,
                                               std::uint64_t seed) {
    if (!dataset.labels || !dataset.class_count) {
        throw ContractError("select_representatives: dataset carries no labels");
    }
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw ConfigError("representative fraction must be in (0, 1]");
    }
    const int n = dataset.size();
    const int k = *dataset.class_count;
    if (fraction * n < static_cast<double>(k)) {
        throw ConfigError("representative fraction too small to cover every class");
    }
    const auto per_class =
        static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) / static_cast<double>(k)));

    std::vector<std::vector<int>> class_indices(static_cast<std::size_t>(k));
    for (int i = 0; i < n; ++i) {
        class_indices[static_cast<std::size_t>((*dataset.labels)[static_cast<std::size_t>(i)])].push_back(i);
    }

    Rng rng(derive_seed(seed, "select-representatives"));
    std::vector<int> selected;
    for (auto& indices : class_indices) {
        rng.shuffle(indices);
        const std::size_t take = std::min(per_class, indices.size());
        selected.insert(selected.end(), indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(take));
    }
    std::sort(selected.begin(), selected.end());

    RepresentativeSelection result;
    result.selected_indices = selected;
    for (const int index : selected) {
        result.representatives.instances.push_back(dataset.instances[static_cast<std::size_t>(index)]);
        result.representatives.labels.push_back((*dataset.labels)[static_cast<std::size_t>(index)]);
        result.representatives.origins.push_back(Origin::Expert);
    }
    result.unlabeled = dataset;
    result.unlabeled.labels.reset();
    result.unlabeled.class_count.reset();
    return result;
}

TimeSeriesDataset concat_instances(const TimeSeriesDataset& dataset, const std::vector<TimeSeries>& extra) {
    TimeSeriesDataset result = dataset;
    result.labels.reset();
    result.class_count.reset();
    result.instances.insert(result.instances.end(), extra.begin(), extra.end());
    return result;
}

TimeSeriesDataset align_labels(const TimeSeriesDataset& dataset, const std::vector<double>& label_names) {
    if (!dataset.labels) {
        throw ContractError("align_labels: dataset carries no labels");
    }
    TimeSeriesDataset result = dataset;
    for (auto& label : *result.labels) {
        const double original = dataset.label_names.empty()
                                    ? static_cast<double>(label)
                                    : dataset.label_names[static_cast<std::size_t>(label)];
        int mapped = -1;
        for (std::size_t id = 0; id < label_names.size(); ++id) {
            if (label_names[id] == original) {
                mapped = static_cast<int>(id);
                break;
            }
        }
        if (mapped < 0) {
            throw InputError("align_labels: label value not present in the reference vocabulary");
        }
        label = mapped;
    }
    result.label_names = label_names;
    result.class_count = static_cast<int>(label_names.size());
    return result;
}

}  // namespace autolabel
