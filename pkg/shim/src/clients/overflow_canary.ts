import { overflowCanaryClient } from '../clients';

process.exit(overflowCanaryClient());
