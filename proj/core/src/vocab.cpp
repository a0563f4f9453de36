#include "insight/micro_lm.hpp"

#include <cctype>
#include <fstream>

#include "insight/error.hpp"

namespace insight {

namespace {

constexpr int kVocabSize = 512;

const char* kCurated[] = {
    // punctuation and digits
    ".", ",", ":", ";", "!", "?", "'", "\"", "(", ")", "-",
    "0", "1", "2", "3", "4", "5", "6", "7", "8", "9",
    // prompt and label vocabulary
    "classify", "user", "behavior", "types", "analyze", "process", "following",
    "input", "data", "records", "weather", "nice", "today", "plan", "picnic",
    "normal", "malicious", "abnormal", "harmless", "benign", "insider",
    "threat", "routine", "suspicious", "activity", "risky", "safe",
    // general vocabulary
    "the", "a", "an", "of", "to", "and", "in", "is", "it", "you", "that",
    "he", "was", "for", "on", "are", "as", "with", "his", "they", "i", "at",
    "be", "this", "have", "from", "or", "one", "had", "by", "word", "but",
    "not", "what", "all", "were", "we", "when", "your", "can", "said",
    "there", "use", "each", "which", "she", "do", "how", "their", "if",
    "will", "up", "other", "about", "out", "many", "then", "them", "these",
    "so", "some", "her", "would", "make", "like", "him", "into", "time",
    "has", "look", "two", "more", "write", "go", "see", "number", "no",
    "way", "could", "people", "my", "than", "first", "water", "been",
    "call", "who", "oil", "its", "now", "find", "long", "down", "day",
    "did", "get", "come", "made", "may", "part", "over", "new", "sound",
    "take", "only", "little", "work", "know", "place", "year", "live",
    "me", "back", "give", "most", "very", "after", "thing", "our", "just",
    "name", "good", "sentence", "man", "think", "say", "great", "where",
    "help", "through", "much", "before", "line", "right", "too", "mean",
    "old", "any", "same", "tell", "boy", "follow", "came", "want", "show",
    "also", "around", "form", "three", "small", "set", "put", "end",
    "does", "another", "well", "large", "must", "big", "even", "such",
    "because", "turn", "here", "why", "ask", "went", "men", "read",
    "need", "land", "different", "home", "us", "move", "try", "kind",
    "hand", "picture", "again", "change", "off", "play", "spell", "air",
    "away", "animal", "house", "point", "page", "letter", "mother",
    "answer", "found", "study", "still", "learn", "should", "world",
    "high", "every", "near", "add", "food", "between", "own", "below",
    "country", "plant", "last", "school", "father", "keep", "tree",
    "never", "start", "city", "earth", "eye", "light", "thought", "head",
    "under", "story", "saw", "left", "few", "while", "along", "might",
    "close", "something", "seem", "next", "hard", "open", "example",
    "begin", "life", "always", "those", "both", "paper", "together",
    "got", "group", "often", "run", "important", "until", "children",
    "side", "feet", "car", "mile", "night", "walk", "white", "sea",
    "began", "grow", "took", "river", "four", "carry", "state", "once",
    "book", "hear", "stop", "without", "second", "later", "miss", "idea",
    "enough", "eat", "face", "watch", "far", "real", "almost", "let",
    "above", "girl", "sometimes", "mountain", "cut", "young", "talk",
    "soon", "list", "song", "being", "leave", "family", "body", "music",
    "color", "stand", "sun", "questions", "fish", "area", "mark", "dog",
    "horse", "birds", "problem", "complete", "room", "knew", "since",
    "ever", "piece", "told", "usually", "didnt", "friends", "easy",
    "heard", "order", "red", "door", "sure", "become", "top", "ship",
    "across", "during", "hours", "better", "best", "however", "low",
    "measure", "remember", "early", "waves", "reached", "listen", "wind",
    "rock", "space", "covered", "fast", "several", "hold", "himself",
    "toward", "five", "step", "morning", "passed", "vowel", "true",
    "hundred", "against", "pattern", "numeral", "table", "north", "slowly",
    "money", "map", "farm", "pulled", "draw", "voice", "seen", "cold",
    "cried", "notice", "south", "sing", "war", "ground", "fall", "king",
    "town", "unit", "figure", "certain", "field", "travel", "wood",
    "fire", "upon", "done", "english", "road", "halt", "ten", "fly",
    "gave", "box", "finally", "wait", "correct", "oh", "quickly",
    "person", "became", "shown", "minutes", "strong", "verb", "stars",
    "front", "feel", "fact", "inches", "street", "decided", "contain",
    "course", "surface", "produce", "building", "ocean", "class", "note",
    "nothing", "rest", "carefully", "scientists", "inside", "wheels",
    "stay", "green", "known", "island", "week", "less", "machine", "base",
    "ago", "stood", "plane", "system", "bring", "report", "force", "round",
};

std::vector<std::string> build_builtin_words() {
    std::vector<std::string> words;
    words.reserve(kVocabSize);
    words.push_back("[unk]");
    for (const char* w : kCurated) words.emplace_back(w);
    if (words.size() > kVocabSize) {
        fail(ErrorKind::state, "curated vocabulary exceeds the fixed size");
    }
    // Reserved filler entries keep the vocabulary at its fixed size.
    int next = 0;
    while (words.size() < kVocabSize) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "w%03d", next++);
        words.emplace_back(buf);
    }
    return words;
}

} // namespace

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
    if (words_.empty()) fail(ErrorKind::config, "vocabulary must not be empty");
    for (int i = 0; i < static_cast<int>(words_.size()); ++i) {
        if (!index_.emplace(words_[i], i).second) {
            fail(ErrorKind::config, "duplicate vocabulary word: " + words_[i]);
        }
    }
}

const Vocabulary& Vocabulary::builtin() {
    static const Vocabulary v(build_builtin_words());
    return v;
}

Vocabulary Vocabulary::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open vocabulary: " + path);
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        words.push_back(line);
    }
    return Vocabulary(std::move(words));
}

void Vocabulary::write(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write vocabulary: " + path);
    for (const auto& w : words_) out << w << '\n';
}

int Vocabulary::token_id(const std::string& word) const {
    auto it = index_.find(word);
    return it == index_.end() ? kUnk : it->second;
}

std::vector<std::string> lm_tokenize(const std::string& text) {
    static const std::string punct = ".,:;!?'\"()-";
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    };
    for (char raw : text) {
        char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
        if (std::isspace(static_cast<unsigned char>(c))) {
            flush();
        } else if (punct.find(c) != std::string::npos) {
            flush();
            tokens.push_back(std::string(1, c));
        } else {
            cur.push_back(c);
        }
    }
    flush();
    return tokens;
}

} // namespace insight
