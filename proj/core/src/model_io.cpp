#include "lnn/model_io.hpp"

#include "lnn/errors.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace lnn {

namespace {

void put(std::ostream& out, double x) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc())
        throw DataError("cannot format value");
    out.write(buf.data(), ptr - buf.data());
}

void put_row(std::ostream& out, std::span<const double> row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i)
            out << ' ';
        put(out, row[i]);
    }
    out << '\n';
}

std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        if (ch == '%')
            out += "%25";
        else if (ch == ' ')
            out += "%20";
        else if (ch == '\t')
            out += "%09";
        else if (ch == '\n')
            out += "%0A";
        else
            out.push_back(ch);
    }
    return out.empty() ? "%" : out;
}

std::string unescape(const std::string& s) {
    if (s == "%")
        return {};
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size()) {
            int code = std::stoi(s.substr(i + 1, 2), nullptr, 16);
            out.push_back(static_cast<char>(code));
            i += 2;
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::string word() {
        std::string w;
        if (!(in_ >> w))
            throw DataError("model file truncated");
        return w;
    }

    void expect(const std::string& keyword) {
        std::string w = word();
        if (w != keyword)
            throw DataError("model file: expected '" + keyword + "', found '" + w + "'");
    }

    double real() {
        std::string w = word();
        double x = 0.0;
        auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), x);
        if (ec != std::errc() || ptr != w.data() + w.size())
            throw DataError("model file: bad number '" + w + "'");
        return x;
    }

    template <typename T>
    T integer() {
        std::string w = word();
        T x{};
        auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), x);
        if (ec != std::errc() || ptr != w.data() + w.size())
            throw DataError("model file: bad integer '" + w + "'");
        return x;
    }

    void fill(std::span<double> out) {
        for (double& x : out)
            x = real();
    }

private:
    std::istream& in_;
};

} // namespace

void write_model(std::ostream& out, const ModelFile& file) {
    const TrainedModel& m = file.model;
    const Topology& topo = m.topology;
    out << "lnn-model " << kModelFormatVersion << '\n';
    out << "variant " << escape(file.variant) << '\n';

    out << "scale ";
    put_row(out, std::array{m.scale.min_rating, m.scale.max_rating, m.scale.step,
                            m.scale.target_low, m.scale.target_high});

    out << "topology " << topo.latent_count << ' ' << topo.attribute_count << ' '
        << topo.output_count << ' ' << to_string(topo.hidden_activation) << ' '
        << to_string(topo.output_activation) << ' ' << topo.hidden_sizes.size();
    for (std::size_t h : topo.hidden_sizes)
        out << ' ' << h;
    out << '\n';

    for (const Layer& layer : m.weights.layers()) {
        out << "layer " << layer.inputs() << ' ' << layer.outputs() << '\n';
        for (std::size_t j = 0; j < layer.outputs(); ++j)
            put_row(out, layer.row(j));
        out << "bias ";
        put_row(out, layer.biases());
    }

    out << "latents " << m.latents.rows() << ' ' << m.latents.cols() << '\n';
    for (std::size_t r = 0; r < m.latents.rows(); ++r)
        put_row(out, m.latents.row(r));

    const ItemProfiles& p = m.profiles;
    out << "profiles " << p.num_items() << ' ' << p.num_attributes() << ' '
        << p.attribute_names().size();
    for (const std::string& name : p.attribute_names())
        out << ' ' << escape(name);
    out << '\n';
    for (std::size_t r = 0; r < p.num_items(); ++r)
        put_row(out, p.row(r));

    out << "counts " << file.item_rating_counts.size();
    for (std::size_t c : file.item_rating_counts)
        out << ' ' << c;
    out << '\n';
    out << "item_ids " << file.item_ids.size();
    for (std::int64_t id : file.item_ids.ids())
        out << ' ' << id;
    out << '\n';
    out << "user_ids " << file.user_ids.size();
    for (std::int64_t id : file.user_ids.ids())
        out << ' ' << id;
    out << '\n';
    out << "end\n";
}

ModelFile read_model(std::istream& in) {
    Reader rd(in);
    rd.expect("lnn-model");
    const int version = rd.integer<int>();
    if (version != kModelFormatVersion)
        throw DataError("unsupported model format version " + std::to_string(version));

    ModelFile file;
    TrainedModel& m = file.model;
    rd.expect("variant");
    file.variant = unescape(rd.word());

    rd.expect("scale");
    m.scale.min_rating = rd.real();
    m.scale.max_rating = rd.real();
    m.scale.step = rd.real();
    m.scale.target_low = rd.real();
    m.scale.target_high = rd.real();

    rd.expect("topology");
    Topology& topo = m.topology;
    topo.latent_count = rd.integer<std::size_t>();
    topo.attribute_count = rd.integer<std::size_t>();
    topo.output_count = rd.integer<std::size_t>();
    topo.hidden_activation = activation_from_string(rd.word());
    topo.output_activation = activation_from_string(rd.word());
    const auto hidden = rd.integer<std::size_t>();
    for (std::size_t k = 0; k < hidden; ++k)
        topo.hidden_sizes.push_back(rd.integer<std::size_t>());

    m.weights = WeightSet(topo);
    for (Layer& layer : m.weights.layers()) {
        rd.expect("layer");
        const auto inputs = rd.integer<std::size_t>();
        const auto outputs = rd.integer<std::size_t>();
        if (inputs != layer.inputs() || outputs != layer.outputs())
            throw DataError("model file: layer shape does not match topology");
        rd.fill(layer.weights());
        rd.expect("bias");
        rd.fill(layer.biases());
    }
    if (!m.weights.all_finite())
        throw DataError("model file: non-finite weight");

    rd.expect("latents");
    const auto rows = rd.integer<std::size_t>();
    const auto cols = rd.integer<std::size_t>();
    if (cols != topo.latent_count)
        throw DataError("model file: latent width does not match topology");
    m.latents = LatentMatrix(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        rd.fill(m.latents.row(r));

    rd.expect("profiles");
    const auto items = rd.integer<std::size_t>();
    const auto attrs = rd.integer<std::size_t>();
    const auto named = rd.integer<std::size_t>();
    if (items != rows || attrs != topo.attribute_count)
        throw DataError("model file: profile shape does not match topology");
    std::vector<std::string> names;
    for (std::size_t i = 0; i < named; ++i)
        names.push_back(unescape(rd.word()));
    m.profiles = named == 0 ? ItemProfiles(items, attrs) : ItemProfiles(items, attrs, names);
    for (std::size_t r = 0; r < items; ++r)
        rd.fill(m.profiles.row(r));

    rd.expect("counts");
    const auto ncounts = rd.integer<std::size_t>();
    file.item_rating_counts.resize(ncounts);
    for (auto& c : file.item_rating_counts)
        c = rd.integer<std::size_t>();

    auto read_ids = [&](const char* key) {
        rd.expect(key);
        const auto n = rd.integer<std::size_t>();
        std::vector<std::int64_t> ids(n);
        for (auto& id : ids)
            id = rd.integer<std::int64_t>();
        return IdMap(std::move(ids));
    };
    file.item_ids = read_ids("item_ids");
    file.user_ids = read_ids("user_ids");
    rd.expect("end");
    return file;
}

std::string serialize_model(const ModelFile& file) {
    std::ostringstream os;
    write_model(os, file);
    return os.str();
}

void save_model(const std::filesystem::path& path, const ModelFile& file) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write " + path.string());
    write_model(out, file);
    if (!out)
        throw DataError("write failed for " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open " + path.string());
    return read_model(in);
}

} // namespace lnn
