/**
 * Payload shapes of the triage service's JSON API.
 */

export type Polarity = 'positive' | 'neutral' | 'negative';

export const POLARITIES: readonly Polarity[] = ['positive', 'neutral', 'negative'];

export interface TriageItem {
  comment_id: string;
  text: string;
  predicted_polarity: Polarity;
  confidence: number;
  topic_id: number;
  status: 'pending' | 'reviewed';
  human_label: Polarity | null;
}

export interface QueueResponse {
  threshold: number;
  count: number;
  items: TriageItem[];
}

export interface CurvePoint {
  threshold: number;
  coverage: number;
  correctness: number;
  covered_count: number;
}

export interface TopicInfo {
  topic_id: number;
  name: string;
  top_words: [string, number][];
  representative_comments: [string, number][];
}

export interface GroupRow {
  topic_id: number;
  polarity: Polarity;
  count: number;
  min: number;
  q1: number;
  median: number;
  q3: number;
  max: number;
  mean: number;
}

export interface StatsReport {
  classes: Polarity[];
  macro_train: number;
  macro_test: number;
  confusion_train: number[][];
  confusion_test: number[][];
  threshold_curve: CurvePoint[];
  topics: TopicInfo[];
  group_scores: GroupRow[];
  group_rr: GroupRow[];
}
