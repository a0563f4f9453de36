#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "insight/tensor.hpp"

namespace insight {

// Fixed word-level vocabulary: line number = token id, id 0 is the reserved
// unknown token.
class Vocabulary {
public:
    static const Vocabulary& builtin(); // 512 entries
    static Vocabulary from_file(const std::string& path);
    void write(const std::string& path) const;

    explicit Vocabulary(std::vector<std::string> words);

    int size() const { return static_cast<int>(words_.size()); }
    const std::string& word(int id) const { return words_.at(id); }
    int token_id(const std::string& word) const; // kUnk when absent
    bool contains(const std::string& word) const { return token_id(word) != kUnk || word == words_[0]; }

    static constexpr int kUnk = 0;

private:
    std::vector<std::string> words_;
    std::map<std::string, int> index_;
};

// Lowercases, splits on whitespace and peels punctuation characters off as
// single-character tokens ("types:" -> "types", ":").
std::vector<std::string> lm_tokenize(const std::string& text);

enum class PromptStrategy { task_instruction, task_agnostic, noisy, none };
enum class VerbalizerStrategy { class_description, antonyms, random_words, numeric };

const char* prompt_strategy_name(PromptStrategy s);
PromptStrategy prompt_strategy_from_name(const std::string& s);
const char* verbalizer_strategy_name(VerbalizerStrategy s);
VerbalizerStrategy verbalizer_strategy_from_name(const std::string& s);

struct PromptSpec {
    std::string prompt_text;
    std::array<std::vector<std::string>, 2> label_words; // class 0 / class 1
    PromptStrategy prompt_strategy = PromptStrategy::task_instruction;
    VerbalizerStrategy verbalizer_strategy = VerbalizerStrategy::class_description;

    // random_words picks a fixed seeded pair from the vocabulary.
    static PromptSpec make(PromptStrategy p, VerbalizerStrategy v, const Vocabulary& vocab,
                           uint64_t seed);
};

struct Prediction {
    int label = 0; // argmax, ties resolve to 0
    std::array<double, 2> scores{}; // cosine per class
    bool tie = false;
};

struct MicroLMConfig {
    int d = 64;
    int layers = 2;
    int heads = 4;
    int ffn_hidden = 128;
    int context = 64;
    double ln_eps = 1e-5;
};

struct LoRAConfig {
    int rank = 8;
    double alpha = 16.0;
    double dropout = 0.05;

    double scaling() const { return alpha / rank; }
};

// Trainable low-rank update for one frozen projection: the effective update
// is (alpha/rank) * down * up with down (d_in x r) and up (r x d_out); up
// starts at zero so the initial model equals the frozen base.
struct LoRAPair {
    Tensor down;
    Tensor up;
};

// Frozen decoder-only causal LM (pre-norm blocks, learned positions, final
// norm). LoRA adapts the q and v projections of every block.
class MicroLM {
public:
    MicroLM(const MicroLMConfig& cfg, const LoRAConfig& lora, const Vocabulary& vocab,
            const Rng& root);

    const Vocabulary& vocab() const { return *vocab_; }
    const MicroLMConfig& config() const { return cfg_; }
    const LoRAConfig& lora_config() const { return lora_cfg_; }

    std::vector<int> tokenize_to_ids(const std::string& text) const;
    Tensor embed_tokens(const std::vector<int>& ids) const; // constant L x d

    // Runs [fused ; prompt embedding] through the decoder; returns all
    // positions after the final norm. fused may carry gradients.
    Tensor forward(const Tensor& fused, const std::vector<int>& prompt_ids, bool train,
                   Rng& dropout_rng) const;
    Tensor final_hidden(const Tensor& fused, const std::vector<int>& prompt_ids, bool train,
                        Rng& dropout_rng) const; // 1 x d, last position

    // Unit-normalized class vectors (mean of label-word embeddings) as a
    // d x 2 constant; inner products with it are the training scores and
    // share their argmax with the cosine route.
    Tensor class_score_matrix(const PromptSpec& spec) const;
    std::array<std::vector<double>, 2> class_vectors(const PromptSpec& spec) const;

    std::vector<std::pair<std::string, Tensor>> lora_parameters() const;
    std::vector<std::pair<std::string, Tensor>> frozen_parameters() const;

private:
    struct Block {
        Tensor ln1_g, ln1_b, ln2_g, ln2_b;
        Linear wq, wk, wv, wo;
        Linear ffn_in, ffn_out;
        LoRAPair lora_q, lora_v;
    };

    MicroLMConfig cfg_;
    LoRAConfig lora_cfg_;
    const Vocabulary* vocab_;
    Tensor embedding_; // vocab x d, frozen
    Tensor positions_; // context x d, frozen
    Tensor lnf_g, lnf_b;
    std::vector<Block> blocks_;
};

// Cosine scoring of the final hidden state against per-class verbalizer
// vectors; argmax with ties (including a zero hidden state) going to class 0.
Prediction verbalizer_predict(std::span<const double> h_final,
                              const std::array<std::vector<double>, 2>& class_vectors);

} // namespace insight
