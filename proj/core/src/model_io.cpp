#include "oaembed/model.hpp"

#include <cstring>
#include <fstream>

#include "oaembed/errors.hpp"

namespace oaembed {

namespace {

constexpr char kMagic[8] = {'O', 'A', 'E', 'M', 'B', 'E', 'D', '1'};

template <typename T>
void write_le(std::ofstream& out, T value) {
    // Host is little-endian on every supported target.
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in, const std::string& path) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw CorruptFileError(path + ": truncated model file");
    return value;
}

}  // namespace

std::string to_string(TrainMode mode) {
    return mode == TrainMode::SkipGram ? "skipgram" : "cbow";
}

TrainMode parse_mode(const std::string& s) {
    if (s == "skipgram" || s == "skip-gram") return TrainMode::SkipGram;
    if (s == "cbow") return TrainMode::Cbow;
    throw UsageError("unknown mode: " + s + " (expected skipgram or cbow)");
}

void TrainingConfig::validate() const {
    if (dim < 1) throw UsageError("dim must be >= 1");
    if (window < 1) throw UsageError("window must be >= 1");
    if (epochs < 0) throw UsageError("epochs must be >= 0");
    if (negatives < 1) throw UsageError("negatives must be >= 1");
    if (!(lr_final > 0.0) || lr_final > lr_initial) {
        throw UsageError("need 0 < lr_final <= lr_initial");
    }
    if (!(subsample_threshold > 0.0) || subsample_threshold > 1.0) {
        throw UsageError("subsample threshold must be in (0, 1]");
    }
    if (threads < 1) throw UsageError("threads must be >= 1");
}

void save_model(const EmbeddingModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_le(out, std::uint8_t(model.mode));
    write_le(out, std::uint64_t(model.vocab_size()));
    write_le(out, std::uint64_t(model.dim));
    for (std::uint32_t id = 0; id < model.vocab_size(); ++id) {
        const auto& word = model.vocab.word_of(id);
        write_le(out, std::uint32_t(word.size()));
        out.write(word.data(), std::streamsize(word.size()));
        write_le(out, std::uint64_t(model.vocab.count_of(id)));
    }
    out.write(reinterpret_cast<const char*>(model.input.data()),
              std::streamsize(model.input.size() * sizeof(float)));
    out.write(reinterpret_cast<const char*>(model.context.data()),
              std::streamsize(model.context.size() * sizeof(float)));
    if (!out) throw IoError("write failed: " + path);
}

EmbeddingModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw VersionMismatchError(path + ": not an OAEMBED1 model file");
    }
    auto mode_byte = read_le<std::uint8_t>(in, path);
    if (mode_byte > 1) throw CorruptFileError(path + ": unknown mode byte");
    auto v = read_le<std::uint64_t>(in, path);
    auto d = read_le<std::uint64_t>(in, path);
    if (v == 0 || d == 0) throw CorruptFileError(path + ": empty model dimensions");

    std::vector<std::string> words(v);
    std::vector<std::uint64_t> counts(v);
    for (std::uint64_t i = 0; i < v; ++i) {
        auto len = read_le<std::uint32_t>(in, path);
        words[i].resize(len);
        in.read(words[i].data(), len);
        if (!in) throw CorruptFileError(path + ": truncated vocabulary block");
        counts[i] = read_le<std::uint64_t>(in, path);
    }

    EmbeddingModel model;
    model.mode = TrainMode(mode_byte);
    model.dim = std::size_t(d);
    model.vocab = Vocabulary::from_id_ordered(std::move(words), std::move(counts));
    model.input.resize(std::size_t(v * d));
    model.context.resize(std::size_t(v * d));
    in.read(reinterpret_cast<char*>(model.input.data()),
            std::streamsize(model.input.size() * sizeof(float)));
    in.read(reinterpret_cast<char*>(model.context.data()),
            std::streamsize(model.context.size() * sizeof(float)));
    if (!in) throw CorruptFileError(path + ": truncated matrix block");
    return model;
}

}  // namespace oaembed
