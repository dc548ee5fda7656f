//! Closed-class English function words, shared by answer-head selection and
//! output-word attribution.

const STOPWORDS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "some", "any", "each", "every", "all",
    "of", "in", "on", "at", "to", "for", "from", "by", "with", "about", "into", "over", "after",
    "before", "as", "and", "or", "but", "nor", "so", "if", "than", "then", "not", "no", "is",
    "are", "was", "were", "be", "been", "being", "has", "have", "had", "do", "does", "did",
    "will", "would", "can", "could", "may", "might", "must", "shall", "should", "it", "its",
    "he", "she", "they", "them", "his", "her", "their", "we", "our", "you", "your", "i", "me",
    "my", "who", "whom", "which", "what", "there", "here", "also", "very",
];

pub fn is_stopword(token: &str) -> bool {
    let lower = token.to_lowercase();
    STOPWORDS.contains(&lower.as_str())
}

/// Non-stopword token with at least one alphanumeric character.
pub fn is_content_word(token: &str) -> bool {
    token.chars().any(char::is_alphanumeric) && !is_stopword(token)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_insensitive() {
        assert!(is_stopword("The"));
        assert!(!is_stopword("man"));
        assert!(!is_content_word(","));
        assert!(is_content_word("76ers"));
    }
}
