import { churnClient } from '../clients';

process.exit(churnClient());
